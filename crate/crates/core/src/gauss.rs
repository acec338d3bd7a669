//! Gaussian-weight calculus.
//!
//! Everything here is taken against the normalised Gaussian density
//! `rho_m(y) = (4 pi)^(-m/2) exp(-|y|^2 / 4)` on `R^m`, i.e. a centred normal
//! law with variance 2 in every coordinate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Exponent vector of the monomial `y^alpha = prod y_i^alpha_i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    /// `|alpha|`, the total degree.
    pub fn degree(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn has_odd_entry(&self) -> bool {
        self.entries.iter().any(|a| a % 2 == 1)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        Self::new(v.to_vec())
    }
}

/// Moment `I_alpha = int y^alpha rho_m` from the Gamma-function closed form
/// `pi^(-m/2) 2^|alpha| prod Gamma((alpha_i + 1) / 2)`, zero if any entry is odd.
pub fn gaussian_moment(alpha: &MultiIndex) -> f64 {
    if alpha.has_odd_entry() {
        return 0.0;
    }
    let m = alpha.dimension() as f64;
    let mut value = PI.powf(-0.5 * m) * 2f64.powi(alpha.degree() as i32);
    for &a in alpha.entries() {
        value *= gamma((a as f64 + 1.0) / 2.0);
    }
    value
}

/// Exact integer value of [`gaussian_moment`].
///
/// Each even coordinate contributes `(2j - 1)!! * 2^j` for `alpha_i = 2j`,
/// the `2j`-th moment of a normal law with variance 2.
pub fn gaussian_moment_exact(alpha: &MultiIndex) -> Result<u128> {
    if alpha.has_odd_entry() {
        return Ok(0);
    }
    let overflow = || Error::Domain(format!("moment of {:?} overflows u128", alpha.entries()));
    let mut value: u128 = 1;
    for &a in alpha.entries() {
        let j = a / 2;
        for odd in (1..2 * j).step_by(2) {
            value = value.checked_mul(odd as u128).ok_or_else(overflow)?;
        }
        value = value.checked_mul(1u128 << j).ok_or_else(overflow)?;
    }
    Ok(value)
}

/// The seven moment values tabulated for even degrees up to six, keyed by
/// the sorted non-zero exponent pattern.
pub const MOMENT_TABLE: [(&[u32], u128); 7] = [
    (&[0], 1),
    (&[2], 2),
    (&[4], 12),
    (&[6], 120),
    (&[2, 2], 4),
    (&[4, 2], 24),
    (&[2, 2, 2], 8),
];

/// Tensorised Gauss-Hermite rule for `rho_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    dimension: usize,
    points_per_axis: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// One-dimensional rule with `n` nodes, exact to degree `2n - 1`.
    ///
    /// Standard Gauss-Hermite nodes for `exp(-t^2)` are mapped by `y = 2t`
    /// and the `(4 pi)^(-1/2)` normalisation is folded into the weights.
    pub fn gauss_hermite(n: usize) -> Self {
        let (t, w) = hermite_nodes(n);
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        Self {
            dimension: 1,
            points_per_axis: n,
            nodes: t.iter().map(|x| 2.0 * x).collect(),
            weights: w.iter().map(|x| x * inv_sqrt_pi).collect(),
        }
    }

    /// Tensor product of the `n`-point rule over `dimension` axes.
    pub fn tensor(n: usize, dimension: usize) -> Self {
        let base = Self::gauss_hermite(n);
        let total = n.pow(dimension as u32);
        let mut nodes = Vec::with_capacity(total * dimension);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut w = 1.0;
            for _ in 0..dimension {
                let i = rem % n;
                rem /= n;
                nodes.push(base.nodes[i]);
                w *= base.weights[i];
            }
            weights.push(w);
        }
        Self {
            dimension,
            points_per_axis: n,
            nodes,
            weights,
        }
    }

    /// Smallest rule exact for total degree `degree` in `dimension` variables.
    pub fn exact_for(degree: u32, dimension: usize) -> Self {
        let n = (degree as usize + 2) / 2;
        Self::tensor(n.max(1), dimension)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(&self) -> u32 {
        2 * self.points_per_axis as u32 - 1
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weighted sum of `f` over the nodes.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * f(self.node(i))).sum()
    }
}

/// Gauss-Hermite nodes and weights for `exp(-t^2)` by Newton iteration on
/// the orthonormal Hermite recurrence.
fn hermite_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // ascending order
    x.reverse();
    w.reverse();
    (x, w)
}

/// Weighted quadrature of `y^alpha`; an independent route to [`gaussian_moment`].
pub fn moment_by_quadrature(alpha: &MultiIndex, rule: &QuadratureRule) -> Result<f64> {
    if alpha.dimension() != rule.dimension() {
        return Err(Error::DimensionMismatch {
            expected: rule.dimension(),
            got: alpha.dimension(),
        });
    }
    if alpha.degree() > rule.degree() {
        return Err(Error::InsufficientDegree {
            degree: rule.degree(),
            requested: alpha.degree(),
        });
    }
    Ok(rule.integrate(|y| {
        y.iter()
            .zip(alpha.entries())
            .map(|(yi, &a)| yi.powi(a as i32))
            .product()
    }))
}

/// Regularised upper incomplete gamma function `Q(s, x)`.
///
/// Series below `x = s + 1`, Lentz continued fraction above.
pub fn gamma_q(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let ln_prefactor = s * x.ln() - x - statrs::function::gamma::ln_gamma(s);
    if x < s + 1.0 {
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut a = s;
        for _ in 0..10_000 {
            a += 1.0;
            term *= x / a;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        1.0 - sum * ln_prefactor.exp()
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        ln_prefactor.exp() * h
    }
}

/// `int_{R^n \ B_R} |x|^m exp(-|x|^2 / 4) dx`.
///
/// Radial reduction gives `2^(m+n) pi^(n/2) Gamma(s, R^2/4) / Gamma(n/2)`
/// with `s = (m + n) / 2`.
pub fn cutoff_tail(n: u32, m: u32, radius: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain(format!("cutoff_tail needs n >= 1, got {n}")));
    }
    if !(radius >= 1.0) {
        return Err(Error::Domain(format!(
            "cutoff_tail needs R >= 1, got {radius}"
        )));
    }
    let s = 0.5 * (m + n) as f64;
    let nf = n as f64;
    let upper = gamma(s) * gamma_q(s, 0.25 * radius * radius);
    Ok(2f64.powi((m + n) as i32) * PI.powf(0.5 * nf) * upper / gamma(0.5 * nf))
}

/// `cutoff_tail / (R^(n+m+2) exp(-R^2/4))`, the quantity bounded by `c_{n,m}`.
pub fn cutoff_ratio(n: u32, m: u32, radius: f64) -> Result<f64> {
    let tail = cutoff_tail(n, m, radius)?;
    Ok(tail / (radius.powi((n + m + 2) as i32) * (-0.25 * radius * radius).exp()))
}

/// Empirical supremum of [`cutoff_ratio`] over `samples` radii evenly spaced in `[r_min, r_max]`.
pub fn cutoff_constant(n: u32, m: u32, r_min: f64, r_max: f64, samples: usize) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for i in 0..samples {
        let r = r_min + (r_max - r_min) * i as f64 / (samples - 1).max(1) as f64;
        sup = sup.max(cutoff_ratio(n, m, r)?);
    }
    Ok(sup)
}

/// Both sides of the weighted Poincare inequality
/// `1/4 int u^2 |y|^2 rho <= int (d u^2 + 4 |grad u|^2) rho` on `R^d`,
/// evaluated with `rule` from samples at its nodes.
pub fn gaussian_poincare_check(
    rule: &QuadratureRule,
    values: &[f64],
    gradients: &[Vec<f64>],
) -> Result<(f64, f64)> {
    if values.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            got: values.len(),
        });
    }
    if gradients.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            got: gradients.len(),
        });
    }
    let d = rule.dimension();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..rule.len() {
        let g = &gradients[i];
        if g.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: g.len(),
            });
        }
        let y2: f64 = rule.node(i).iter().map(|y| y * y).sum();
        let grad2: f64 = g.iter().map(|x| x * x).sum();
        let u = values[i];
        let w = rule.weights()[i];
        lhs += 0.25 * w * u * u * y2;
        rhs += w * (d as f64 * u * u + 4.0 * grad2);
    }
    Ok((lhs, rhs))
}
