//! Shrinker curves: the round circle and the Abresch-Langer family.
//!
//! The curvature ODE `kappa'' - kappa'^2/kappa + kappa^3 = kappa/2` is
//! integrated in `w = ln kappa`, where it becomes the separable Hamiltonian
//! system `w' = p`, `p' = 1/2 - exp(2w)` with energy
//! `E = p^2/2 + exp(2w)/2 - w/2`. The tangent angle `theta' = kappa` and the
//! Frenet position `x' = (cos theta, sin theta)` ride along with the
//! potential sub-flow, which is exactly solvable because `w` is frozen there.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};

/// Largest integrator substep used unless overridden.
pub const DEFAULT_MAX_SUBSTEP: f64 = 0.01;
/// Default number of samples on a reconstructed curve.
pub const DEFAULT_GRID: usize = 512;
/// Target for `|g(kappa_max)|` in the closure search.
pub const CLOSURE_TOLERANCE: f64 = 1e-10;

/// Sampled solution of the curvature ODE.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub sigma_grid: Vec<f64>,
    pub kappa: Vec<f64>,
    pub kappa_dot: Vec<f64>,
    /// Tangent angle, `theta(0) = 0`.
    pub theta: Vec<f64>,
    /// Frenet-integrated positions starting at the origin.
    pub frenet: Vec<[f64; 2]>,
    /// Arclength of one full curvature oscillation (full length for the circle).
    pub period: f64,
    /// Energy `E` at the initial point.
    pub first_integral: f64,
    /// Largest relative deviation of `E` from its initial value along the run.
    pub energy_drift: f64,
    pub kappa_max: f64,
    /// Arclength spanned by the samples plus one step.
    pub span: f64,
    /// Tangent angle and Frenet position one step past the last sample.
    pub end_theta: f64,
    pub end_position: [f64; 2],
    /// Rotation data `(p, q)` when produced by the closure search.
    pub rotation: Option<(u32, u32)>,
}

impl CurvatureProfile {
    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.span / self.len() as f64
    }

    /// `|x(span) - x(0)|` of the Frenet integration.
    pub fn closure_defect(&self) -> f64 {
        let a = self.end_position;
        let b = self.frenet[0];
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    /// Distance of the total turning to the nearest multiple of `2 pi`.
    pub fn angular_defect(&self) -> f64 {
        let turns = (self.end_theta / (2.0 * PI)).round();
        self.end_theta - 2.0 * PI * turns
    }

    /// `max |kappa'' - kappa'^2/kappa + kappa^3 - kappa/2|` with `kappa''`
    /// taken by spectral differentiation of the sampled `kappa'`; only
    /// meaningful for closed profiles.
    pub fn ode_residual(&self) -> f64 {
        let grid = crate::periodic::Periodic::new(self.len(), self.span);
        let kdd = grid.derivative(&self.kappa_dot, 1);
        (0..self.len())
            .map(|i| {
                let k = self.kappa[i];
                let kd = self.kappa_dot[i];
                (kdd[i] - kd * kd / k + k * k * k - 0.5 * k).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
struct State {
    w: f64,
    p: f64,
    theta: f64,
    x: f64,
    y: f64,
}

impl State {
    fn start(kappa0: f64) -> Self {
        Self {
            w: kappa0.ln(),
            p: 0.0,
            theta: 0.0,
            x: 0.0,
            y: 0.0,
        }
    }

    fn energy(&self) -> f64 {
        0.5 * self.p * self.p + 0.5 * (2.0 * self.w).exp() - 0.5 * self.w
    }

    fn drift(&mut self, tau: f64) {
        self.w += self.p * tau;
    }

    fn kick(&mut self, tau: f64) {
        let k = self.w.exp();
        self.p += (0.5 - k * k) * tau;
        let delta = k * tau;
        let mid = self.theta + 0.5 * delta;
        let chord = 2.0 * (0.5 * delta).sin() / k;
        self.x += chord * mid.cos();
        self.y += chord * mid.sin();
        self.theta += delta;
    }

    fn strang(&mut self, tau: f64) {
        self.drift(0.5 * tau);
        self.kick(tau);
        self.drift(0.5 * tau);
    }

    /// Sixth-order symmetric composition of Strang steps.
    fn step(&mut self, tau: f64) {
        const W1: f64 = -1.177_679_984_178_87;
        const W2: f64 = 0.235_573_213_359_357;
        const W3: f64 = 0.784_513_610_477_560;
        const W0: f64 = 1.0 - 2.0 * (W1 + W2 + W3);
        for c in [W3, W2, W1, W0, W1, W2, W3] {
            self.strang(c * tau);
        }
    }

    fn check(&self, sigma: f64) -> Result<()> {
        if !self.w.is_finite() || !self.p.is_finite() || self.w > 700.0 {
            return Err(Error::Integration {
                sigma,
                reason: format!("state left the representable range (ln kappa = {})", self.w),
            });
        }
        Ok(())
    }
}

/// Integrates the curvature ODE from an extremum `kappa(0) = kappa0`,
/// `kappa'(0) = 0`, returning `steps` samples spaced by `h`.
pub fn integrate_curvature_ode(kappa0: f64, steps: usize, h: f64) -> Result<CurvatureProfile> {
    integrate_with(kappa0, steps, h, DEFAULT_MAX_SUBSTEP)
}

/// As [`integrate_curvature_ode`] with an explicit substep bound.
pub fn integrate_with(
    kappa0: f64,
    steps: usize,
    h: f64,
    max_substep: f64,
) -> Result<CurvatureProfile> {
    if !(kappa0 > 0.0) || !kappa0.is_finite() {
        return Err(Error::Domain(format!("initial curvature must be positive, got {kappa0}")));
    }
    if !(h > 0.0) || steps == 0 {
        return Err(Error::Domain("need a positive step and at least one sample".into()));
    }
    let sub = (h / max_substep).ceil().max(1.0) as usize;
    let tau = h / sub as f64;
    let mut s = State::start(kappa0);
    let e0 = s.energy();
    let mut drift: f64 = 0.0;
    let mut out = ProfileBuilder::with_capacity(steps);
    for i in 0..steps {
        out.push(i as f64 * h, &s);
        for _ in 0..sub {
            s.step(tau);
        }
        s.check((i + 1) as f64 * h)?;
        drift = drift.max(((s.energy() - e0) / e0).abs());
    }
    let period = if is_circle_value(kappa0) {
        2.0 * PI * SQRT_2
    } else {
        2.0 * half_period_with(kappa0, max_substep)?.0
    };
    Ok(out.finish(period, e0, drift, kappa0, steps as f64 * h, &s))
}

struct ProfileBuilder {
    sigma: Vec<f64>,
    kappa: Vec<f64>,
    kappa_dot: Vec<f64>,
    theta: Vec<f64>,
    frenet: Vec<[f64; 2]>,
}

impl ProfileBuilder {
    fn with_capacity(n: usize) -> Self {
        Self {
            sigma: Vec::with_capacity(n),
            kappa: Vec::with_capacity(n),
            kappa_dot: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            frenet: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, sigma: f64, s: &State) {
        let k = s.w.exp();
        self.sigma.push(sigma);
        self.kappa.push(k);
        self.kappa_dot.push(k * s.p);
        self.theta.push(s.theta);
        self.frenet.push([s.x, s.y]);
    }

    fn finish(
        self,
        period: f64,
        e0: f64,
        drift: f64,
        kappa_max: f64,
        span: f64,
        end: &State,
    ) -> CurvatureProfile {
        CurvatureProfile {
            sigma_grid: self.sigma,
            kappa: self.kappa,
            kappa_dot: self.kappa_dot,
            theta: self.theta,
            frenet: self.frenet,
            period,
            first_integral: e0,
            energy_drift: drift,
            kappa_max,
            span,
            end_theta: end.theta,
            end_position: [end.x, end.y],
            rotation: None,
        }
    }
}

fn is_circle_value(kappa0: f64) -> bool {
    (kappa0 - FRAC_1_SQRT_2).abs() <= 1e-14
}

/// First integral `kappa'^2/(2 kappa^2) + kappa^2/2 - ln(kappa)/2`.
pub fn first_integral(kappa: f64, kappa_dot: f64) -> f64 {
    let r = kappa_dot / kappa;
    0.5 * r * r + 0.5 * kappa * kappa - 0.5 * kappa.ln()
}

/// Arclength and tangent-angle advance from the extremum `kappa0` to the
/// next extremum of the opposite kind.
pub fn half_period(kappa0: f64) -> Result<(f64, f64)> {
    half_period_with(kappa0, DEFAULT_MAX_SUBSTEP)
}

fn half_period_with(kappa0: f64, tau: f64) -> Result<(f64, f64)> {
    if !(kappa0 > 0.0) {
        return Err(Error::Domain(format!("initial curvature must be positive, got {kappa0}")));
    }
    if is_circle_value(kappa0) {
        return Err(Error::Domain("the circle value is an equilibrium without half period".into()));
    }
    let sign = (0.5 - kappa0 * kappa0).signum();
    let mut s = State::start(kappa0);
    let mut sigma = 0.0;
    let limit = 1e4;
    loop {
        let prev = s;
        s.step(tau);
        sigma += tau;
        s.check(sigma)?;
        if s.p * sign < 0.0 && sigma > tau {
            // refine the crossing p = 0 by Newton on the last partial step
            let base = sigma - tau;
            let mut t = tau * prev.p / (prev.p - s.p);
            for _ in 0..60 {
                let mut trial = prev;
                trial.step(t);
                let dp = 0.5 - (2.0 * trial.w).exp();
                let dt = trial.p / dp;
                t -= dt;
                if dt.abs() <= 1e-16 * (1.0 + t.abs()) {
                    break;
                }
            }
            let mut trial = prev;
            trial.step(t);
            return Ok((base + t, trial.theta));
        }
        if sigma > limit {
            return Err(Error::Integration {
                sigma,
                reason: "no curvature extremum found".into(),
            });
        }
    }
}

/// `g(kappa_max) = theta(half period) - pi p / q`.
pub fn closure_function(p: u32, q: u32, kappa_max: f64) -> Result<f64> {
    let (_, theta) = half_period(kappa_max)?;
    Ok(theta - PI * p as f64 / q as f64)
}

/// Samples of the closure function on `samples` evenly spaced points of `[lo, hi]`.
pub fn closure_scan(p: u32, q: u32, lo: f64, hi: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    (0..samples)
        .map(|i| {
            let k = lo + (hi - lo) * i as f64 / (samples - 1).max(1) as f64;
            closure_function(p, q, k).map(|g| (k, g))
        })
        .collect()
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Options of the closure search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    pub grid: usize,
    pub max_substep: f64,
    pub tolerance: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            max_substep: DEFAULT_MAX_SUBSTEP,
            tolerance: CLOSURE_TOLERANCE,
        }
    }
}

/// Default search bracket for `kappa_max`.
pub const DEFAULT_BRACKET: (f64, f64) = (0.72, 5.0);

/// Closed curve with rotation index `p` after `q` curvature periods.
pub fn find_closed_curve(p: u32, q: u32, bracket: (f64, f64)) -> Result<CurvatureProfile> {
    find_closed_curve_with(p, q, bracket, &ShootingOptions::default())
}

pub fn find_closed_curve_with(
    p: u32,
    q: u32,
    bracket: (f64, f64),
    opts: &ShootingOptions,
) -> Result<CurvatureProfile> {
    if p == 0 || q == 0 || gcd(p, q) != 1 {
        return Err(Error::Domain(format!("(p, q) = ({p}, {q}) must be positive and coprime")));
    }
    if (p, q) == (1, 1) {
        return Ok(circle_profile(opts.grid));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo > FRAC_1_SQRT_2) || !(hi > lo) {
        return Err(Error::Domain(format!(
            "bracket [{lo}, {hi}] must lie above the circle value 1/sqrt(2)"
        )));
    }
    let g = |k: f64| -> Result<f64> {
        let (_, theta) = half_period_with(k, opts.max_substep)?;
        Ok(theta - PI * p as f64 / q as f64)
    };
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NoSignChange {
            p,
            q,
            lo,
            hi,
            g_lo,
            g_hi,
        });
    }
    let mut root = 0.5 * (lo + hi);
    for _ in 0..200 {
        root = 0.5 * (lo + hi);
        let g_mid = g(root)?;
        if g_mid.abs() <= opts.tolerance || hi - lo <= 4.0 * f64::EPSILON * root {
            break;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = root;
            g_lo = g_mid;
        } else {
            hi = root;
        }
    }
    let (half, _) = half_period_with(root, opts.max_substep)?;
    let length = 2.0 * q as f64 * half;
    let mut profile = integrate_with(root, opts.grid, length / opts.grid as f64, opts.max_substep)?;
    profile.period = 2.0 * half;
    profile.rotation = Some((p, q));
    Ok(profile)
}

/// The constant profile `kappa = 1/sqrt(2)` over the full circle.
pub fn circle_profile(n: usize) -> CurvatureProfile {
    let length = 2.0 * PI * SQRT_2;
    let h = length / n as f64;
    let k = FRAC_1_SQRT_2;
    let sigma: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let theta: Vec<f64> = sigma.iter().map(|s| k * s).collect();
    let frenet = theta
        .iter()
        .map(|t| [SQRT_2 * t.sin(), SQRT_2 * (1.0 - t.cos())])
        .collect();
    CurvatureProfile {
        sigma_grid: sigma,
        kappa: vec![k; n],
        kappa_dot: vec![0.0; n],
        theta,
        frenet,
        period: length,
        first_integral: first_integral(k, 0.0),
        energy_drift: 0.0,
        kappa_max: k,
        span: length,
        end_theta: 2.0 * PI,
        end_position: [0.0, 0.0],
        rotation: Some((1, 1)),
    }
}

/// Diagnostics of a reconstructed shrinker curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub closure_defect: f64,
    pub angular_defect: f64,
    pub rotation_index: i64,
    /// `max |<x, N>/2 - kappa|` on the Frenet-integrated positions after
    /// the best rigid translation.
    pub shrinker_residual: f64,
    /// `max | |x|^2 - 4 kappa^2 - 4 kappa'^2/kappa^2 |` on the same positions.
    pub position_identity_residual: f64,
    pub weight_kappa_spread: f64,
}

/// Plane curve of a closed profile, positioned by
/// `x = (2 kappa'/kappa) T + 2 kappa N`.
pub fn reconstruct_curve(profile: &CurvatureProfile) -> Result<ClosedCurve> {
    let defect = profile.angular_defect();
    if defect.abs() > 1e-8 {
        return Err(Error::NonClosing { defect });
    }
    let n = profile.len();
    let positions: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let (c, s) = (profile.theta[i].cos(), profile.theta[i].sin());
            let a = 2.0 * profile.kappa_dot[i] / profile.kappa[i];
            let b = 2.0 * profile.kappa[i];
            [a * c + b * s, a * s - b * c]
        })
        .collect();
    let mut curve = ClosedCurve::from_frenet(
        profile.span,
        positions,
        &profile.theta,
        profile.kappa.clone(),
        profile.kappa_dot.clone(),
        profile.closure_defect(),
    )?;
    let c = curve
        .weight
        .iter()
        .zip(&curve.kappa)
        .map(|(r, k)| r * k)
        .sum::<f64>()
        / n as f64;
    curve.weight_constant = Some(c);
    Ok(curve)
}

/// Checks the reconstruction against the independently integrated Frenet positions.
pub fn reconstruction_report(profile: &CurvatureProfile, curve: &ClosedCurve) -> ReconstructionReport {
    let n = profile.len();
    let mut offset = [0.0; 2];
    for i in 0..n {
        offset[0] += (curve.positions[i][0] - profile.frenet[i][0]) / n as f64;
        offset[1] += (curve.positions[i][1] - profile.frenet[i][1]) / n as f64;
    }
    let mut shrinker: f64 = 0.0;
    let mut identity: f64 = 0.0;
    for i in 0..n {
        let x = [profile.frenet[i][0] + offset[0], profile.frenet[i][1] + offset[1]];
        let nn = curve.normal[i];
        let k = profile.kappa[i];
        let kd = profile.kappa_dot[i];
        shrinker = shrinker.max((0.5 * (x[0] * nn[0] + x[1] * nn[1]) - k).abs());
        let r2 = x[0] * x[0] + x[1] * x[1];
        identity = identity.max((r2 - 4.0 * k * k - 4.0 * kd * kd / (k * k)).abs());
    }
    ReconstructionReport {
        closure_defect: profile.closure_defect(),
        angular_defect: profile.angular_defect(),
        rotation_index: (profile.end_theta / (2.0 * PI)).round() as i64,
        shrinker_residual: shrinker,
        position_identity_residual: identity,
        weight_kappa_spread: curve.weight_kappa_spread(),
    }
}

/// The three quadrature routes to `B_1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct B1Routes {
    /// `-int (kappa^6 - 3 kappa^2 kappa'^2) rho`
    pub route_a: f64,
    /// `-c int (kappa^5 - 3 kappa kappa'^2)`
    pub route_b: f64,
    /// `-(c/2) int kappa^3`
    pub route_c: f64,
}

impl B1Routes {
    pub fn max_disagreement(&self) -> f64 {
        let v = [self.route_a, self.route_b, self.route_c];
        let max = v.iter().copied().fold(f64::MIN, f64::max);
        let min = v.iter().copied().fold(f64::MAX, f64::min);
        max - min
    }
}

pub fn compute_b1(curve: &ClosedCurve) -> Result<B1Routes> {
    let c = curve
        .weight_constant
        .ok_or_else(|| Error::Domain("B1 needs a shrinker curve with its weight constant".into()))?;
    let k = &curve.kappa;
    let kd = &curve.kappa_dot;
    let a: Vec<f64> = (0..k.len())
        .map(|i| k[i].powi(6) - 3.0 * k[i] * k[i] * kd[i] * kd[i])
        .collect();
    let b: Vec<f64> = (0..k.len())
        .map(|i| k[i].powi(5) - 3.0 * k[i] * kd[i] * kd[i])
        .collect();
    let cube: Vec<f64> = k.iter().map(|x| x.powi(3)).collect();
    Ok(B1Routes {
        route_a: -curve.integrate_weighted(&a),
        route_b: -c * curve.integrate(&b),
        route_c: -0.5 * c * curve.integrate(&cube),
    })
}

/// Both sides of the integration-by-parts identities
/// `int kappa'' kappa^n = -n int kappa'^2 kappa^(n-1)` and
/// `-n int kappa'^2 kappa^(n-2) = int (kappa^n/2 - kappa^(n+2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationIdentities {
    pub first: (f64, f64),
    /// Present for `n >= 2`.
    pub second: Option<(f64, f64)>,
}

pub fn integration_identity_check(curve: &ClosedCurve, n: u32) -> Result<IntegrationIdentities> {
    if n < 1 {
        return Err(Error::Domain("identity exponent must be at least 1".into()));
    }
    if !curve.is_uniform(1e-10) {
        return Err(Error::NonUniformGrid { spread: curve.speed_spread() });
    }
    let grid = curve.periodic();
    let kdd: Vec<f64> = grid
        .derivative(&curve.kappa_dot, 1)
        .iter()
        .map(|d| d / curve.speed[0])
        .collect();
    let k = &curve.kappa;
    let kd = &curve.kappa_dot;
    let nf = n as f64;
    let m = k.len();
    let f1: Vec<f64> = (0..m).map(|i| kdd[i] * k[i].powi(n as i32)).collect();
    let f2: Vec<f64> = (0..m).map(|i| kd[i] * kd[i] * k[i].powi(n as i32 - 1)).collect();
    let first = (curve.integrate(&f1), -nf * curve.integrate(&f2));
    let second = if n >= 2 {
        let g1: Vec<f64> = (0..m).map(|i| kd[i] * kd[i] * k[i].powi(n as i32 - 2)).collect();
        let g2: Vec<f64> = (0..m)
            .map(|i| 0.5 * k[i].powi(n as i32) - k[i].powi(n as i32 + 2))
            .collect();
        Some((-nf * curve.integrate(&g1), curve.integrate(&g2)))
    } else {
        None
    };
    Ok(IntegrationIdentities { first, second })
}

/// Gaussian area `F = int rho ds`.
pub fn gaussian_area(curve: &ClosedCurve) -> f64 {
    curve.gaussian_area()
}

/// `F` of the circle of radius `r`: `r sqrt(pi) exp(-r^2/4)`.
pub fn circle_gaussian_area(r: f64) -> f64 {
    r * PI.sqrt() * (-0.25 * r * r).exp()
}

/// `B_1` of the shrinking circle: `-(sqrt(2 pi)/8) exp(-1/2)`.
pub fn circle_b1() -> f64 {
    -(2.0 * PI).sqrt() / 8.0 * (-0.5f64).exp()
}

/// The shrinking circle of radius `sqrt 2` with its weight constant.
pub fn shrinking_circle(n: usize) -> ClosedCurve {
    reconstruct_curve(&circle_profile(n)).expect("circle profile closes exactly")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_equilibrium_is_constant() {
        let p = integrate_curvature_ode(FRAC_1_SQRT_2, 200, 0.05).unwrap();
        assert!(p.kappa.iter().all(|k| (k - FRAC_1_SQRT_2).abs() < 1e-15));
        assert!(p.kappa_dot.iter().all(|k| k.abs() < 1e-15));
    }

    #[test]
    fn energy_at_unit_curvature() {
        let p = integrate_curvature_ode(1.0, 400, 0.05).unwrap();
        assert!((p.first_integral - 0.5).abs() < 1e-15);
        assert!(p.energy_drift < 1e-10, "{}", p.energy_drift);
        let kmin = p.kappa.iter().copied().fold(f64::MAX, f64::min);
        assert!(kmin < FRAC_1_SQRT_2);
        for i in 0..p.len() {
            let e = first_integral(p.kappa[i], p.kappa_dot[i]);
            assert!((e - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn half_period_near_circle_is_pi() {
        // linearisation w'' = -(w - w0) has unit frequency
        let (s, theta) = half_period(FRAC_1_SQRT_2 * (1.0 + 1e-5)).unwrap();
        assert!((s - PI).abs() < 1e-4, "{s}");
        assert!((theta - PI * FRAC_1_SQRT_2).abs() < 1e-4);
    }

    #[test]
    fn coprime_required() {
        assert!(matches!(find_closed_curve(2, 4, DEFAULT_BRACKET), Err(Error::Domain(_))));
    }

    #[test]
    fn circle_reconstruction() {
        let c = shrinking_circle(64);
        for (x, k) in c.positions.iter().zip(&c.kappa) {
            assert!((x[0].hypot(x[1]) - SQRT_2).abs() < 1e-14);
            assert!((k - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert!(c.shrinker_quantity().iter().all(|p| p.abs() < 1e-12));
        let r = reconstruction_report(&circle_profile(64), &c);
        assert!(r.shrinker_residual < 1e-12 && r.closure_defect < 1e-12);
        assert_eq!(r.rotation_index, 1);
    }

    #[test]
    fn circle_b1_routes() {
        let c = shrinking_circle(128);
        let b = compute_b1(&c).unwrap();
        for v in [b.route_a, b.route_b, b.route_c] {
            assert!((v - circle_b1()).abs() < 1e-12);
        }
        assert!((gaussian_area(&c) - circle_gaussian_area(SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn b1_requires_weight_constant() {
        let c = ClosedCurve::circle(SQRT_2, 32);
        assert!(compute_b1(&c).is_err());
    }

    #[test]
    fn circle_identities() {
        let c = shrinking_circle(64);
        for n in 1..5 {
            let r = integration_identity_check(&c, n).unwrap();
            assert!(r.first.0.abs() < 1e-14 && r.first.1.abs() < 1e-14);
            if let Some((a, b)) = r.second {
                assert!(a.abs() < 1e-14 && b.abs() < 1e-12);
            }
        }
        assert!(integration_identity_check(&c, 0).is_err());
    }

    #[test]
    fn circle_area_maximised_at_sqrt2() {
        let h = 1e-5;
        let d = (circle_gaussian_area(SQRT_2 + h) - circle_gaussian_area(SQRT_2 - h)) / (2.0 * h);
        assert!(d.abs() < 1e-9);
        assert!((circle_gaussian_area(SQRT_2) - 1.520_347).abs() < 1e-6);
    }
}
