//! Fourier collocation on uniform periodic grids.
//!
//! All routines take samples `u[i] = u(i * length / n)` of a smooth periodic
//! function. The Nyquist mode of an even-length grid is treated as the real
//! cosine `cos(n x / 2)`: it is dropped by odd-order derivatives and kept by
//! even-order ones.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Cached forward/inverse transforms for one grid size.
#[derive(Clone)]
pub struct Periodic {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Periodic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Periodic")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl Periodic {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            length,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Physical wavenumber of FFT bin `k`, as a signed integer mode index.
    pub fn mode_index(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    fn is_nyquist(&self, k: usize) -> bool {
        self.n % 2 == 0 && k == self.n / 2
    }

    /// Unnormalised DFT of real samples.
    pub fn transform(&self, u: &[f64]) -> Vec<Complex64> {
        assert_eq!(u.len(), self.n, "sample length does not match grid");
        let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse of [`Periodic::transform`], keeping the real part.
    pub fn inverse_real(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut coeffs);
        let scale = 1.0 / self.n as f64;
        coeffs.into_iter().map(|c| c.re * scale).collect()
    }

    /// `order`-th derivative with respect to the physical coordinate.
    pub fn derivative(&self, u: &[f64], order: u32) -> Vec<f64> {
        let coeffs = self.transform(u);
        self.inverse_real(self.apply_derivative(coeffs, order))
    }

    fn apply_derivative(&self, mut coeffs: Vec<Complex64>, order: u32) -> Vec<Complex64> {
        let base = 2.0 * PI / self.length;
        for (k, c) in coeffs.iter_mut().enumerate() {
            if order % 2 == 1 && self.is_nyquist(k) {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let ik = Complex64::new(0.0, base * self.mode_index(k) as f64);
            *c *= ik.powu(order);
        }
        coeffs
    }

    /// First and second derivatives from a single forward transform.
    pub fn derivatives12(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let coeffs = self.transform(u);
        let d1 = self.inverse_real(self.apply_derivative(coeffs.clone(), 1));
        let d2 = self.inverse_real(self.apply_derivative(coeffs, 2));
        (d1, d2)
    }

    /// Values of the trigonometric interpolant at the half-grid points
    /// `(i + 1/2) * spacing`.
    pub fn half_shift(&self, u: &[f64]) -> Vec<f64> {
        let mut coeffs = self.transform(u);
        let h = self.spacing();
        let base = 2.0 * PI / self.length;
        for (k, c) in coeffs.iter_mut().enumerate() {
            if self.is_nyquist(k) {
                // cos(n x / 2) vanishes at the half-grid points
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let phase = base * self.mode_index(k) as f64 * 0.5 * h;
            *c *= Complex64::from_polar(1.0, phase);
        }
        self.inverse_real(coeffs)
    }

    /// Trapezoid rule over one period; spectrally accurate for smooth data.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        u.iter().sum::<f64>() * self.spacing()
    }

    /// Evaluates the trigonometric interpolant of precomputed coefficients at `x`.
    pub fn evaluate(&self, coeffs: &[Complex64], x: f64) -> f64 {
        let base = 2.0 * PI / self.length;
        let mut acc = coeffs[0].re;
        let half = self.n / 2;
        for k in 1..self.n.div_ceil(2) {
            let c = coeffs[k];
            let t = base * k as f64 * x;
            acc += 2.0 * (c.re * t.cos() - c.im * t.sin());
        }
        if self.n % 2 == 0 && half > 0 {
            acc += coeffs[half].re * (base * half as f64 * x).cos();
        }
        acc / self.n as f64
    }

    /// Staggered differentiation matrix mapping node values to derivatives
    /// at half-grid points, stored row-major (`row = half point`).
    ///
    /// Built from the derivative of the periodic cardinal function, so the
    /// only null vector is the constant.
    pub fn staggered_derivative_matrix(&self) -> Vec<f64> {
        let n = self.n;
        assert!(n % 2 == 0, "staggered differentiation requires an even grid");
        let scale = 2.0 * PI / self.length;
        let nf = n as f64;
        let mut kernel = vec![0.0; n];
        for (m, k) in kernel.iter_mut().enumerate() {
            let x = (m as f64 + 0.5) * 2.0 * PI / nf;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let s = (0.5 * x).sin();
            *k = -sign / (2.0 * nf * s * s) * scale;
        }
        let mut g = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let m = (j + n - i) % n;
                g[j * n + i] = kernel[m];
            }
        }
        g
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Log-log slope of `ys` against `xs`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(n: usize, length: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 * length / n as f64)).collect()
    }

    #[test]
    fn derivatives_of_trig_polynomial_are_exact() {
        let n = 64;
        let length = 7.3;
        let w = 2.0 * PI / length;
        let p = Periodic::new(n, length);
        let u = samples(n, length, |x| (3.0 * w * x).sin() + 0.5 * (5.0 * w * x).cos());
        let (d1, d2) = p.derivatives12(&u);
        for i in 0..n {
            let x = i as f64 * length / n as f64;
            let e1 = 3.0 * w * (3.0 * w * x).cos() - 2.5 * w * (5.0 * w * x).sin();
            let e2 = -9.0 * w * w * (3.0 * w * x).sin() - 12.5 * w * w * (5.0 * w * x).cos();
            assert!((d1[i] - e1).abs() < 1e-11);
            assert!((d2[i] - e2).abs() < 1e-10);
        }
    }

    #[test]
    fn second_derivative_matches_repeated_first_for_smooth_data() {
        let n = 128;
        let length = 2.0 * PI;
        let p = Periodic::new(n, length);
        let u = samples(n, length, |x| (x.cos()).exp());
        let twice = p.derivative(&p.derivative(&u, 1), 1);
        let direct = p.derivative(&u, 2);
        let err = twice
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn staggered_matrix_differentiates_to_half_points() {
        let n = 32;
        let length = 3.0;
        let w = 2.0 * PI / length;
        let p = Periodic::new(n, length);
        let g = p.staggered_derivative_matrix();
        let u = samples(n, length, |x| (2.0 * w * x).sin());
        for j in 0..n {
            let xh = (j as f64 + 0.5) * length / n as f64;
            let val: f64 = (0..n).map(|i| g[j * n + i] * u[i]).sum();
            assert!((val - 2.0 * w * (2.0 * w * xh).cos()).abs() < 1e-11);
        }
        // constants are annihilated, the Nyquist mode is not
        let ones = vec![1.0; n];
        let nyq: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let c: f64 = (0..n).map(|i| g[i] * ones[i]).sum();
        let z: f64 = (0..n).map(|i| g[i] * nyq[i]).sum();
        assert!(c.abs() < 1e-12);
        assert!(z.abs() > 1.0);
    }

    #[test]
    fn half_shift_and_evaluate_agree() {
        let n = 48;
        let length = 5.0;
        let w = 2.0 * PI / length;
        let p = Periodic::new(n, length);
        let f = |x: f64| (w * x).cos() + 0.3 * (4.0 * w * x).sin();
        let u = samples(n, length, f);
        let shifted = p.half_shift(&u);
        let coeffs = p.transform(&u);
        for (j, s) in shifted.iter().enumerate() {
            let xh = (j as f64 + 0.5) * length / n as f64;
            assert!((s - f(xh)).abs() < 1e-12);
            assert!((p.evaluate(&coeffs, xh) - f(xh)).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let xs = [1e-3, 2e-3, 4e-3, 8e-3];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(2.5)).collect();
        assert!((fit_loglog_slope(&xs, &ys) - 2.5).abs() < 1e-12);
    }
}
