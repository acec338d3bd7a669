//! Quadratic obstruction calculus on generalised cylinders `Gamma x R^d`.
//!
//! A Jacobi field quadratic in the axis variables is `U = u H` with
//! `u(y) = sum a_ij (y_i y_j - 2 delta_ij)`. Its `L^2` norm is
//! `8 lambda sum a_ij^2` and its second variation projects onto the mode
//! `(y_b^2 - 2) H` with value `2 B_1 I_b`, where
//! `I_b = int u^2 (y_b^2 - 2) rho_d = 64 sum_i a_bi^2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::gauss::{gaussian_moment_exact, MultiIndex};

/// Largest axis dimension handled by the monomial expansion.
pub const MAX_BRUTEFORCE_DIM: usize = 6;

/// Symmetric coefficient matrix `a_ij`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadCoeffs {
    dim: usize,
    a: Vec<f64>,
}

impl QuadCoeffs {
    /// Builds from a row-major matrix, which must be exactly symmetric.
    pub fn new(dim: usize, a: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("axis dimension must be at least 1".into()));
        }
        if a.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: a.len(),
            });
        }
        for i in 0..dim {
            for j in 0..i {
                if a[i * dim + j] != a[j * dim + i] {
                    return Err(Error::Domain(format!("coefficients not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { dim, a })
    }

    /// Builds from the upper triangle `a_ij, i <= j`, in row order.
    pub fn from_upper(dim: usize, upper: &[f64]) -> Result<Self> {
        let expected = dim * (dim + 1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: upper.len(),
            });
        }
        let mut a = vec![0.0; dim * dim];
        let mut it = upper.iter();
        for i in 0..dim {
            for j in i..dim {
                let v = *it.next().expect("length checked");
                a[i * dim + j] = v;
                a[j * dim + i] = v;
            }
        }
        Self::new(dim, a)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            a: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.dim + j]
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            dim: self.dim,
            a: self.a.iter().map(|v| t * v).collect(),
        }
    }

    /// `sum_ij a_ij^2` over all ordered pairs.
    pub fn frobenius_sq(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum()
    }

    /// `sum_i a_bi^2`.
    pub fn row_sq(&self, b: usize) -> f64 {
        (0..self.dim).map(|i| self.get(b, i).powi(2)).sum()
    }

    /// `u(y) = sum a_ij (y_i y_j - 2 delta_ij)`.
    pub fn evaluate(&self, y: &[f64]) -> f64 {
        let mut u = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let d = if i == j { 2.0 } else { 0.0 };
                u += self.get(i, j) * (y[i] * y[j] - d);
            }
        }
        u
    }
}

/// Cross-section constants entering the obstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionInvariants {
    /// Gaussian area of the cross-section.
    pub lambda: f64,
    pub b1: f64,
    /// `(k, n, m)`: cross-section dimension, cylinder dimension, ambient dimension.
    pub codim_split: (u32, u32, u32),
}

/// Area of the round `k`-sphere of radius `r`.
pub fn sphere_area(k: u32, r: f64) -> f64 {
    let kf = k as f64;
    2.0 * PI.powf(0.5 * (kf + 1.0)) / gamma(0.5 * (kf + 1.0)) * r.powf(kf)
}

impl CrossSectionInvariants {
    fn checked(lambda: f64, b1: f64, k: u32, dim: u32) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        if dim < 1 {
            return Err(Error::Domain("axis dimension must be at least 1".into()));
        }
        Ok(Self {
            lambda,
            b1,
            codim_split: (k, k + dim, k + dim + 1),
        })
    }

    /// Round sphere `S^k` of radius `sqrt(2k)` with `dim` axis directions.
    ///
    /// `B_1 = -(1/(8 k^2)) int rho`, i.e. `-lambda / (8 k^2)`.
    pub fn sphere(k: u32, dim: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::Domain("sphere dimension must be at least 1".into()));
        }
        let kf = k as f64;
        let rho = (4.0 * PI).powf(-0.5 * kf) * (-0.5 * kf).exp();
        let lambda = rho * sphere_area(k, (2.0 * kf).sqrt());
        Self::checked(lambda, -lambda / (8.0 * kf * kf), k, dim)
    }

    /// The shrinking circle, from closed forms.
    pub fn circle(dim: u32) -> Result<Self> {
        Self::checked(
            crate::alcurve::circle_gaussian_area(2f64.sqrt()),
            crate::alcurve::circle_b1(),
            1,
            dim,
        )
    }

    /// A shrinker curve, with `lambda = F` and `B_1` by the first quadrature route.
    pub fn curve(curve: &ClosedCurve, dim: u32) -> Result<Self> {
        let b1 = crate::alcurve::compute_b1(curve)?.route_a;
        Self::checked(curve.gaussian_area(), b1, 1, dim)
    }
}

/// `||U||^2 = 8 lambda sum_ij a_ij^2`.
pub fn jacobi_norm(coeffs: &QuadCoeffs, inv: &CrossSectionInvariants) -> f64 {
    8.0 * inv.lambda * coeffs.frobenius_sq()
}

/// `<D^2 phi(U, U), (y_b^2 - 2) H> = 128 B_1 sum_i a_bi^2`.
pub fn quadratic_projection_closedform(
    coeffs: &QuadCoeffs,
    b: usize,
    inv: &CrossSectionInvariants,
) -> Result<f64> {
    if b >= coeffs.dim() {
        return Err(Error::Domain(format!("mode index {b} out of range for dim {}", coeffs.dim())));
    }
    Ok(128.0 * inv.b1 * coeffs.row_sq(b))
}

type Poly = BTreeMap<Vec<u32>, f64>;

fn poly_mul(p: &Poly, q: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in p {
        for (eb, cb) in q {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

/// The polynomial `u(y)` as monomial coefficients.
fn expand_u(coeffs: &QuadCoeffs) -> Poly {
    let d = coeffs.dim();
    let mut u = Poly::new();
    for i in 0..d {
        for j in 0..d {
            let a = coeffs.get(i, j);
            if a == 0.0 {
                continue;
            }
            let mut e = vec![0u32; d];
            e[i] += 1;
            e[j] += 1;
            *u.entry(e).or_insert(0.0) += a;
            if i == j {
                *u.entry(vec![0; d]).or_insert(0.0) -= 2.0 * a;
            }
        }
    }
    u
}

/// `I_b = int u^2 (y_b^2 - 2) rho_d` by monomial expansion against exact moments.
pub fn quadratic_projection_bruteforce(coeffs: &QuadCoeffs, b: usize) -> Result<f64> {
    let d = coeffs.dim();
    if d > MAX_BRUTEFORCE_DIM {
        return Err(Error::Domain(format!(
            "monomial expansion limited to dim <= {MAX_BRUTEFORCE_DIM}, got {d}"
        )));
    }
    if b >= d {
        return Err(Error::Domain(format!("mode index {b} out of range for dim {d}")));
    }
    let u = expand_u(coeffs);
    let mut mode = Poly::new();
    let mut e = vec![0u32; d];
    e[b] = 2;
    mode.insert(e, 1.0);
    mode.insert(vec![0; d], -2.0);
    let integrand = poly_mul(&poly_mul(&u, &u), &mode);
    let mut total = 0.0;
    for (e, c) in integrand {
        let m = gaussian_moment_exact(&MultiIndex::new(e))?;
        total += c * m as f64;
    }
    Ok(total)
}

/// Both sides of the obstruction lower bound `lhs >= delta ||U||^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub lhs: f64,
    pub rhs: f64,
    pub delta: f64,
}

impl LowerBound {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Norm of the projection of `D^2 phi(U, U)` onto the normalised modes
/// `(y_b^2 - 2) H / sqrt(8 lambda)`, against
/// `delta ||U||^2` with `delta = 128 |B_1| / sqrt(8^3 d lambda^3)`.
pub fn obstruction_lower_bound(coeffs: &QuadCoeffs, inv: &CrossSectionInvariants) -> Result<LowerBound> {
    if coeffs.frobenius_sq() == 0.0 {
        return Err(Error::Degenerate("zero coefficient matrix".into()));
    }
    let d = coeffs.dim();
    let basis_norm = (8.0 * inv.lambda).sqrt();
    let mut sum_sq = 0.0;
    for b in 0..d {
        let proj = quadratic_projection_closedform(coeffs, b, inv)? / basis_norm;
        sum_sq += proj * proj;
    }
    let delta = 128.0 * inv.b1.abs() / (512.0 * d as f64 * inv.lambda.powi(3)).sqrt();
    Ok(LowerBound {
        lhs: sum_sq.sqrt(),
        rhs: delta * jacobi_norm(coeffs, inv),
        delta,
    })
}

/// `count` random coefficient matrices of size `dim`, reproducible from `seed`.
pub fn coefficient_ensemble(dim: usize, count: usize, seed: u64) -> Vec<QuadCoeffs> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(dim as u64);
    (0..count).map(|_| random_coeffs(dim, &mut rng)).collect()
}

/// Random symmetric matrix with entries uniform in `[-1, 1]`.
pub fn random_coeffs<R: rand::Rng>(dim: usize, rng: &mut R) -> QuadCoeffs {
    let upper: Vec<f64> = (0..dim * (dim + 1) / 2)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    QuadCoeffs::from_upper(dim, &upper).expect("length matches")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_anchors() {
        let one = QuadCoeffs::new(1, vec![1.0]).unwrap();
        let unit = CrossSectionInvariants {
            lambda: 1.0,
            b1: -1.0,
            codim_split: (1, 2, 3),
        };
        assert_eq!(jacobi_norm(&one, &unit), 8.0);
        assert_eq!(jacobi_norm(&QuadCoeffs::zeros(3), &unit), 0.0);
        let id = QuadCoeffs::new(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let circle = CrossSectionInvariants::circle(2).unwrap();
        assert!((jacobi_norm(&id, &circle) - 16.0 * 1.520_347_1).abs() < 1e-5);
    }

    #[test]
    fn projection_anchors() {
        let circle = CrossSectionInvariants::circle(1).unwrap();
        let one = QuadCoeffs::new(1, vec![1.0]).unwrap();
        let p = quadratic_projection_closedform(&one, 0, &circle).unwrap();
        assert!((p - 128.0 * crate::alcurve::circle_b1()).abs() < 1e-12);
        assert!(p < 0.0);
        assert!(quadratic_projection_closedform(&one, 1, &circle).is_err());
        assert_eq!(quadratic_projection_bruteforce(&one, 0).unwrap(), 64.0);
        let off = QuadCoeffs::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(quadratic_projection_bruteforce(&off, 0).unwrap(), 64.0);
        assert_eq!(quadratic_projection_bruteforce(&QuadCoeffs::zeros(2), 1).unwrap(), 0.0);
    }

    #[test]
    fn bruteforce_dimension_limit() {
        let big = QuadCoeffs::zeros(7);
        assert!(quadratic_projection_bruteforce(&big, 0).is_err());
    }

    #[test]
    fn symmetric_required() {
        assert!(QuadCoeffs::new(2, vec![1.0, 2.0, 3.0, 1.0]).is_err());
        assert!(QuadCoeffs::new(2, vec![1.0]).is_err());
    }

    #[test]
    fn lower_bound_cases() {
        let inv = CrossSectionInvariants::circle(1).unwrap();
        let lb = obstruction_lower_bound(&QuadCoeffs::new(1, vec![0.7]).unwrap(), &inv).unwrap();
        assert!((lb.ratio() - 1.0).abs() < 1e-12);
        let inv2 = CrossSectionInvariants::circle(2).unwrap();
        let diag = QuadCoeffs::new(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let lb = obstruction_lower_bound(&diag, &inv2).unwrap();
        assert!((lb.ratio() - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            obstruction_lower_bound(&QuadCoeffs::zeros(2), &inv2),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sphere_invariants() {
        let s1 = CrossSectionInvariants::sphere(1, 1).unwrap();
        let c = CrossSectionInvariants::circle(1).unwrap();
        assert!((s1.lambda - c.lambda).abs() < 1e-13);
        assert!((s1.b1 - c.b1).abs() < 1e-13);
        for k in 1..5 {
            assert!(CrossSectionInvariants::sphere(k, 1).unwrap().b1 < 0.0);
        }
    }
}
