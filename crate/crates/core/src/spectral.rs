//! Spectra of the drift Laplacian and the Jacobi operator on closed curves.
//!
//! On a curve parametrised by arclength the drift Laplacian is
//! `Lu = rho^-1 (rho u')'`, which equals `kappa (kappa^-1 u')'` on shrinkers.
//! It is discretised in flux form: a staggered Fourier derivative `G` maps
//! node values to half-grid points, the flux is weighted by `rho` at the
//! half points, and the divergence is `-G^T`. The resulting matrix
//! `-rho^-1 G^T diag(rho_half) G` is symmetric after multiplication by
//! `W = diag(rho h)`, annihilates constants exactly and has no spurious
//! kernel on the Nyquist mode. The Jacobi operator adds `kappa^2 + 1/2`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};

/// Largest relative speed spread accepted as an arclength grid.
pub const UNIFORM_TOLERANCE: f64 = 1e-6;
/// Largest `max |phi|` accepted as a shrinker.
pub const SHRINKER_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    DriftLaplacian,
    Jacobi,
}

/// Dense discretisation of an operator on the grid of a curve.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub kind: OperatorKind,
    pub matrix: DMatrix<f64>,
    /// `rho h`, the quadrature weights of the `L^2(rho)` inner product.
    pub weight_vector: Vec<f64>,
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.weight_vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight_vector.is_empty()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let v = &self.matrix * DVector::from_column_slice(u);
        v.iter().copied().collect()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weight_vector
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// `max |W A - (W A)^T| / max |W A|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.len();
        let mut defect: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.weight_vector[i] * self.matrix[(i, j)];
                let b = self.weight_vector[j] * self.matrix[(j, i)];
                defect = defect.max((a - b).abs());
                scale = scale.max(a.abs());
            }
        }
        defect / scale
    }

    /// `||A u - mu u||_{L^2(rho)}`.
    pub fn residual(&self, u: &[f64], mu: f64) -> f64 {
        let au = self.apply(u);
        let r: Vec<f64> = au.iter().zip(u).map(|(a, b)| a - mu * b).collect();
        self.norm(&r)
    }
}

/// Builds the operator of `kind` on an arclength-parametrised curve.
pub fn build_operator(curve: &ClosedCurve, kind: OperatorKind) -> Result<DiscreteOperator> {
    let spread = curve.speed_spread();
    if spread > UNIFORM_TOLERANCE {
        return Err(Error::NonUniformGrid { spread });
    }
    let n = curve.len();
    if n % 2 != 0 {
        return Err(Error::Domain(format!("operator grid must be even, got {n}")));
    }
    let length = curve.length();
    let grid = crate::periodic::Periodic::new(n, length);
    let g = DMatrix::from_row_slice(n, n, &grid.staggered_derivative_matrix());
    let rho_half = grid.half_shift(&curve.weight);
    let mut flux = g.clone();
    for (j, r) in rho_half.iter().enumerate() {
        flux.row_mut(j).scale_mut(*r);
    }
    let mut matrix = -(g.transpose() * flux);
    for (i, r) in curve.weight.iter().enumerate() {
        matrix.row_mut(i).scale_mut(1.0 / r);
    }
    if kind == OperatorKind::Jacobi {
        for (i, k) in curve.kappa.iter().enumerate() {
            matrix[(i, i)] += k * k + 0.5;
        }
    }
    let h = grid.spacing();
    Ok(DiscreteOperator {
        kind,
        matrix,
        weight_vector: curve.weight.iter().map(|r| r * h).collect(),
    })
}

/// Eigenpair with `A psi = mu psi` and `||psi||_{L^2(rho)} = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub eigenfunction: Vec<f64>,
    pub residual: f64,
}

/// Group of eigenvalues closer than the gap tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    pub first_index: usize,
}

/// Leading part of a spectrum, sorted by eigenvalue descending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub pairs: Vec<EigenPair>,
    pub clusters: Vec<Cluster>,
    pub gap_tolerance: f64,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.eigenvalue).collect()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).max().unwrap_or(0)
    }

    /// Pairs whose eigenvalue lies within `tol` of `target`.
    pub fn near(&self, target: f64, tol: f64) -> Vec<&EigenPair> {
        self.pairs
            .iter()
            .filter(|p| (p.eigenvalue - target).abs() <= tol)
            .collect()
    }
}

/// The `count` largest eigenpairs of `op`.
///
/// Clusters are formed from consecutive eigenvalues closer than
/// `1e-6` times the width of the returned head.
pub fn eigensolve(op: &DiscreteOperator, count: usize) -> Result<Spectrum> {
    let n = op.len();
    if count == 0 || count > n {
        return Err(Error::Domain(format!("eigenpair count {count} outside 1..={n}")));
    }
    let sqrt_w: Vec<f64> = op.weight_vector.iter().map(|w| w.sqrt()).collect();
    let mut s = op.matrix.clone();
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] *= sqrt_w[i] / sqrt_w[j];
        }
    }
    let s = (&s + s.transpose()) * 0.5;
    let max_iter = 100 * n;
    let eig = SymmetricEigen::try_new(s, 1e-15, max_iter).ok_or_else(|| {
        Error::Eigen(format!(
            "symmetric QR did not converge within {max_iter} sweeps on a {n}x{n} matrix"
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let pairs: Vec<EigenPair> = order[..count]
        .iter()
        .map(|&k| {
            let mu = eig.eigenvalues[k];
            let mut psi: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, k)] / sqrt_w[i]).collect();
            // fix the sign for reproducible output
            let pivot = psi
                .iter()
                .copied()
                .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
            if pivot < 0.0 {
                psi.iter_mut().for_each(|v| *v = -*v);
            }
            let residual = op.residual(&psi, mu);
            EigenPair {
                eigenvalue: mu,
                eigenfunction: psi,
                residual,
            }
        })
        .collect();
    let width = pairs[0].eigenvalue - pairs[count - 1].eigenvalue;
    let gap_tolerance = 1e-6 * width.max(1.0);
    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if pairs[i - 1].eigenvalue - p.eigenvalue <= gap_tolerance => {
                c.value = (c.value * c.multiplicity as f64 + p.eigenvalue) / (c.multiplicity + 1) as f64;
                c.multiplicity += 1;
            }
            _ => clusters.push(Cluster {
                value: p.eigenvalue,
                multiplicity: 1,
                first_index: i,
            }),
        }
    }
    Ok(Spectrum {
        pairs,
        clusters,
        gap_tolerance,
    })
}

/// Tolerances used by the assumption checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionTolerances {
    /// Bound on relative identity residuals.
    pub residual: f64,
    /// Distance below which an eigenvalue counts as equal to a target.
    pub eigenvalue: f64,
    /// Bound on the largest principal angle.
    pub angle: f64,
}

impl Default for AssumptionTolerances {
    fn default() -> Self {
        Self {
            residual: 1e-5,
            eigenvalue: 1e-6,
            angle: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A1Report {
    pub pass: bool,
    /// `||Lx_i + x_i/2|| / ||x_i||` for `i = 1, 2`.
    pub coordinate_residuals: [f64; 2],
    pub cluster_dimension: usize,
    /// Largest principal angle between the `-1/2` eigenspace and `span{x_1, x_2}`.
    pub subspace_angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A2Report {
    pub pass: bool,
    /// `||L kappa - kappa|| / ||kappa||`.
    pub dilation_residual: f64,
    /// `||L n_i - n_i/2|| / ||n_i||` with `n_i = <e_i, N>`.
    pub translation_residuals: [f64; 2],
    /// `||L(kappa'/kappa)|| / ||kappa'/kappa||`, absent on the circle.
    pub rotation_residual: Option<f64>,
    /// Multiplicities of the eigenvalues `1, 1/2, 0`.
    pub multiplicities: [usize; 3],
    pub expected_multiplicities: [usize; 3],
    /// Eigenvalues in `[-tol, 1 + tol]` other than `1, 1/2, 0`.
    pub other_in_window: Vec<f64>,
}

/// Combined (A1)/(A2) verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub a1: A1Report,
    pub a2: A2Report,
    pub spectrum_head: Vec<f64>,
}

fn require_shrinker(curve: &ClosedCurve) -> Result<()> {
    let residual = curve
        .shrinker_quantity()
        .iter()
        .fold(0.0f64, |m, p| m.max(p.abs()));
    if residual > SHRINKER_TOLERANCE {
        return Err(Error::NotShrinker {
            residual,
            tolerance: SHRINKER_TOLERANCE,
        });
    }
    Ok(())
}

fn relative_residual(op: &DiscreteOperator, u: &[f64], mu: f64) -> f64 {
    op.residual(u, mu) / op.norm(u)
}

fn full_spectrum(op: &DiscreteOperator) -> Result<Spectrum> {
    eigensolve(op, op.len())
}

/// Checks that the coordinate functions span the `-1/2` eigenspace of the
/// drift Laplacian.
pub fn verify_a1(curve: &ClosedCurve, tol: &AssumptionTolerances) -> Result<A1Report> {
    require_shrinker(curve)?;
    let op = build_operator(curve, OperatorKind::DriftLaplacian)?;
    let x = [curve.coordinate(0), curve.coordinate(1)];
    let coordinate_residuals = [
        relative_residual(&op, &x[0], -0.5),
        relative_residual(&op, &x[1], -0.5),
    ];
    let spectrum = full_spectrum(&op)?;
    let cluster = spectrum.near(-0.5, tol.eigenvalue);
    let subspace_angle = principal_angle(&op, &cluster, &x);
    let pass = coordinate_residuals.iter().all(|r| *r <= tol.residual)
        && cluster.len() == 2
        && subspace_angle <= tol.angle;
    Ok(A1Report {
        pass,
        coordinate_residuals,
        cluster_dimension: cluster.len(),
        subspace_angle,
    })
}

/// Largest principal angle between the span of `basis` (orthonormal in the
/// weighted inner product) and the span of `vectors`.
fn principal_angle(op: &DiscreteOperator, basis: &[&EigenPair], vectors: &[Vec<f64>]) -> f64 {
    // orthonormalise the vectors
    let mut q: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut u = v.clone();
        for _ in 0..2 {
            for e in &q {
                let c = op.inner(&u, e);
                u.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
            }
        }
        let nrm = op.norm(&u);
        u.iter_mut().for_each(|a| *a /= nrm);
        q.push(u);
    }
    // components outside the eigenspace
    let r: Vec<Vec<f64>> = q
        .iter()
        .map(|u| {
            let mut res = u.clone();
            for p in basis {
                let c = op.inner(u, &p.eigenfunction);
                res.iter_mut()
                    .zip(&p.eigenfunction)
                    .for_each(|(a, b)| *a -= c * b);
            }
            res
        })
        .collect();
    let m = r.len();
    let gram = DMatrix::from_fn(m, m, |i, j| op.inner(&r[i], &r[j]));
    let largest = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    largest.sqrt().min(1.0).asin()
}

/// Checks the Jacobi identities for dilations, translations and rotations
/// and the multiplicities of the eigenvalues `1, 1/2, 0`.
pub fn verify_a2(curve: &ClosedCurve, tol: &AssumptionTolerances) -> Result<A2Report> {
    require_shrinker(curve)?;
    let op = build_operator(curve, OperatorKind::Jacobi)?;
    let dilation_residual = relative_residual(&op, &curve.kappa, 1.0);
    let translation_residuals = [
        relative_residual(&op, &curve.normal_component(0), 0.5),
        relative_residual(&op, &curve.normal_component(1), 0.5),
    ];
    let kmax = curve.kappa.iter().copied().fold(0.0f64, f64::max);
    let kdmax = curve.kappa_dot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let is_circle = kdmax <= 1e-12 * kmax;
    let rotation_residual = if is_circle {
        None
    } else {
        let r: Vec<f64> = curve
            .kappa_dot
            .iter()
            .zip(&curve.kappa)
            .map(|(d, k)| d / k)
            .collect();
        Some(relative_residual(&op, &r, 0.0))
    };
    let spectrum = full_spectrum(&op)?;
    let targets = [1.0, 0.5, 0.0];
    let multiplicities = targets.map(|t| spectrum.near(t, tol.eigenvalue).len());
    let expected_multiplicities = if is_circle { [1, 2, 0] } else { [1, 2, 1] };
    let other_in_window = spectrum
        .eigenvalues()
        .into_iter()
        .filter(|&mu| mu >= -tol.eigenvalue && mu <= 1.0 + tol.eigenvalue)
        .filter(|mu| targets.iter().all(|t| (mu - t).abs() > tol.eigenvalue))
        .collect();
    let pass = dilation_residual <= tol.residual
        && translation_residuals.iter().all(|r| *r <= tol.residual)
        && rotation_residual.is_none_or(|r| r <= tol.residual)
        && multiplicities == expected_multiplicities;
    Ok(A2Report {
        pass,
        dilation_residual,
        translation_residuals,
        rotation_residual,
        multiplicities,
        expected_multiplicities,
        other_in_window,
    })
}

/// Both assumption checks plus the leading Jacobi eigenvalues.
pub fn assumption_report(
    curve: &ClosedCurve,
    tol: &AssumptionTolerances,
    head: usize,
) -> Result<AssumptionReport> {
    let a1 = verify_a1(curve, tol)?;
    let a2 = verify_a2(curve, tol)?;
    let op = build_operator(curve, OperatorKind::Jacobi)?;
    let spectrum_head = eigensolve(&op, head.min(op.len()))?.eigenvalues();
    Ok(AssumptionReport {
        a1,
        a2,
        spectrum_head,
    })
}

/// Eigenvalues `j (j + k - 1) / (2k)` of `-Delta` on the sphere of radius `sqrt(2k)`.
pub fn sphere_spectrum(k: u32, count: usize) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(Error::Domain("sphere dimension must be at least 1".into()));
    }
    let kf = k as f64;
    Ok((0..count)
        .map(|j| {
            let j = j as f64;
            j * (j + kf - 1.0) / (2.0 * kf)
        })
        .collect())
}

/// Jacobi eigenvalues `1 - j^2/2` of the shrinking circle, with multiplicity, descending.
pub fn circle_jacobi_spectrum(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut j = 0u32;
    while out.len() < count {
        let mu = 1.0 - (j * j) as f64 / 2.0;
        out.push(mu);
        if j > 0 && out.len() < count {
            out.push(mu);
        }
        j += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alcurve::shrinking_circle;

    #[test]
    fn circle_drift_spectrum() {
        let c = shrinking_circle(64);
        let op = build_operator(&c, OperatorKind::DriftLaplacian).unwrap();
        let s = eigensolve(&op, 9).unwrap();
        let expected = [0.0, -0.5, -0.5, -2.0, -2.0, -4.5, -4.5, -8.0, -8.0];
        for (mu, e) in s.eigenvalues().iter().zip(expected) {
            assert!((mu - e).abs() < 1e-10, "{mu} vs {e}");
        }
        assert_eq!(s.clusters[0].multiplicity, 1);
        assert_eq!(s.clusters[1].multiplicity, 2);
    }

    #[test]
    fn constants_in_kernel_and_symmetry() {
        let c = shrinking_circle(32);
        let op = build_operator(&c, OperatorKind::DriftLaplacian).unwrap();
        let lu = op.apply(&vec![1.0; 32]);
        assert!(lu.iter().all(|v| v.abs() < 1e-12));
        assert!(op.symmetry_defect() < 1e-12);
    }

    #[test]
    fn circle_jacobi_head() {
        let c = shrinking_circle(128);
        let op = build_operator(&c, OperatorKind::Jacobi).unwrap();
        let s = eigensolve(&op, 5).unwrap();
        for (mu, e) in s.eigenvalues().iter().zip(circle_jacobi_spectrum(5)) {
            assert!((mu - e).abs() < 1e-10);
        }
        assert!(s.pairs.iter().all(|p| p.residual < 1e-10));
        assert!(s.max_multiplicity() <= 2);
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let pos: Vec<[f64; 2]> = (0..64)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
                [2.0 * t.cos(), t.sin()]
            })
            .collect();
        let c = ClosedCurve::from_positions(pos, 1.0).unwrap();
        assert!(matches!(
            build_operator(&c, OperatorKind::Jacobi),
            Err(Error::NonUniformGrid { .. })
        ));
    }

    #[test]
    fn circle_assumptions() {
        let c = shrinking_circle(64);
        let tol = AssumptionTolerances::default();
        let a1 = verify_a1(&c, &tol).unwrap();
        assert!(a1.pass, "{a1:?}");
        let a2 = verify_a2(&c, &tol).unwrap();
        assert!(a2.pass, "{a2:?}");
        assert_eq!(a2.multiplicities, [1, 2, 0]);
        assert!(a2.rotation_residual.is_none());
    }

    #[test]
    fn non_shrinker_refused() {
        let c = ClosedCurve::circle(1.0, 64);
        let tol = AssumptionTolerances::default();
        assert!(matches!(verify_a1(&c, &tol), Err(Error::NotShrinker { .. })));
        assert!(matches!(verify_a2(&c, &tol), Err(Error::NotShrinker { .. })));
    }

    #[test]
    fn sphere_heads() {
        assert_eq!(sphere_spectrum(1, 4).unwrap(), vec![0.0, 0.5, 2.0, 4.5]);
        let s2 = sphere_spectrum(2, 3).unwrap();
        assert_eq!(s2, vec![0.0, 0.5, 1.5]);
        for k in 1..8 {
            assert_eq!(sphere_spectrum(k, 2).unwrap()[1], 0.5);
        }
        assert!(sphere_spectrum(0, 2).is_err());
    }
}
