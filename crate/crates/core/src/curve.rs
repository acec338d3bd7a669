//! Discretised closed planar curves.
//!
//! Curves are sampled at `n` uniformly spaced parameter values over
//! `[0, param_length)`. Orientation is counter-clockwise, `T` is the unit
//! tangent and `N` the outward unit normal obtained by rotating `T`
//! clockwise, so that `dT/ds = -kappa N` and `dN/ds = kappa T` with respect
//! to arclength `s`. The shrinker quantity is then `<x, N>/2 - kappa`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::Periodic;

/// `(4 pi)^(-1/2) exp(-|x|^2 / 4)`, the one-dimensional Gaussian weight.
pub fn gaussian_weight(x: [f64; 2]) -> f64 {
    (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp() / (4.0 * PI).sqrt()
}

/// Sampled closed curve with its Frenet data and Gaussian weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    pub param_length: f64,
    pub positions: Vec<[f64; 2]>,
    pub tangent: Vec<[f64; 2]>,
    pub normal: Vec<[f64; 2]>,
    pub kappa: Vec<f64>,
    /// Derivative of `kappa` with respect to arclength.
    pub kappa_dot: Vec<f64>,
    /// `|dx/dt|` with respect to the grid parameter.
    pub speed: Vec<f64>,
    pub weight: Vec<f64>,
    /// `c` with `rho * kappa = c`, set for shrinker curves.
    pub weight_constant: Option<f64>,
    pub closure_defect: f64,
}

fn outward(t: [f64; 2]) -> [f64; 2] {
    [t[1], -t[0]]
}

impl ClosedCurve {
    /// Curve parametrised by arclength with exact Frenet data.
    ///
    /// `theta` is the tangent angle, so `T = (cos theta, sin theta)`.
    pub fn from_frenet(
        length: f64,
        positions: Vec<[f64; 2]>,
        theta: &[f64],
        kappa: Vec<f64>,
        kappa_dot: Vec<f64>,
        closure_defect: f64,
    ) -> Result<Self> {
        let n = positions.len();
        for len in [theta.len(), kappa.len(), kappa_dot.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let tangent: Vec<[f64; 2]> = theta.iter().map(|t| [t.cos(), t.sin()]).collect();
        let normal = tangent.iter().copied().map(outward).collect();
        let weight = positions.iter().copied().map(gaussian_weight).collect();
        Ok(Self {
            param_length: length,
            positions,
            tangent,
            normal,
            kappa,
            kappa_dot,
            speed: vec![1.0; n],
            weight,
            weight_constant: None,
            closure_defect,
        })
    }

    /// Geometry recomputed from positions by spectral differentiation in the
    /// grid parameter.
    pub fn from_positions(positions: Vec<[f64; 2]>, param_length: f64) -> Result<Self> {
        let n = positions.len();
        if n < 8 {
            return Err(Error::Domain(format!("curve needs at least 8 samples, got {n}")));
        }
        let grid = Periodic::new(n, param_length);
        let x: Vec<f64> = positions.iter().map(|p| p[0]).collect();
        let y: Vec<f64> = positions.iter().map(|p| p[1]).collect();
        let (x1, x2) = grid.derivatives12(&x);
        let (y1, y2) = grid.derivatives12(&y);
        let mut speed = Vec::with_capacity(n);
        let mut tangent = Vec::with_capacity(n);
        let mut kappa = Vec::with_capacity(n);
        for i in 0..n {
            let s = x1[i].hypot(y1[i]);
            if !(s > 0.0) {
                return Err(Error::Degenerate(format!("zero speed at sample {i}")));
            }
            speed.push(s);
            tangent.push([x1[i] / s, y1[i] / s]);
            kappa.push((x1[i] * y2[i] - y1[i] * x2[i]) / (s * s * s));
        }
        let kappa_dot = grid
            .derivative(&kappa, 1)
            .iter()
            .zip(&speed)
            .map(|(d, s)| d / s)
            .collect();
        let normal = tangent.iter().copied().map(outward).collect();
        let weight = positions.iter().copied().map(gaussian_weight).collect();
        Ok(Self {
            param_length,
            positions,
            tangent,
            normal,
            kappa,
            kappa_dot,
            speed,
            weight,
            weight_constant: None,
            closure_defect: 0.0,
        })
    }

    /// Circle of radius `r` centred at the origin, arclength-parametrised.
    pub fn circle(radius: f64, n: usize) -> Self {
        let length = 2.0 * PI * radius;
        let theta: Vec<f64> = (0..n)
            .map(|i| 2.0 * PI * i as f64 / n as f64 + 0.5 * PI)
            .collect();
        let positions = theta
            .iter()
            .map(|t| [radius * t.sin(), -radius * t.cos()])
            .collect();
        let mut c = Self::from_frenet(
            length,
            positions,
            &theta,
            vec![1.0 / radius; n],
            vec![0.0; n],
            0.0,
        )
        .expect("lengths agree by construction");
        let rho = gaussian_weight([radius, 0.0]);
        c.weight = vec![rho; n];
        c
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Grid spacing in the parameter.
    pub fn spacing(&self) -> f64 {
        self.param_length / self.len() as f64
    }

    pub fn periodic(&self) -> Periodic {
        Periodic::new(self.len(), self.param_length)
    }

    /// Arclength parameter of each sample.
    pub fn sigma(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.len());
        if self.is_uniform(1e-12) {
            return (0..self.len()).map(|i| i as f64 * h * self.speed[0]).collect();
        }
        // cumulative trapezoid, adequate for output columns only
        for i in 0..self.len() {
            out.push(acc);
            let j = (i + 1) % self.len();
            acc += 0.5 * (self.speed[i] + self.speed[j]) * h;
        }
        out
    }

    /// Total length.
    pub fn length(&self) -> f64 {
        self.integrate(&vec![1.0; self.len()])
    }

    /// `int f ds` by the periodic trapezoid rule.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let h = self.spacing();
        f.iter().zip(&self.speed).map(|(a, s)| a * s).sum::<f64>() * h
    }

    /// `int f rho ds`.
    pub fn integrate_weighted(&self, f: &[f64]) -> f64 {
        let h = self.spacing();
        f.iter()
            .zip(&self.speed)
            .zip(&self.weight)
            .map(|((a, s), r)| a * s * r)
            .sum::<f64>()
            * h
    }

    /// `(int |f|^q rho ds)^(1/q)`.
    pub fn weighted_norm(&self, f: &[f64], q: f64) -> f64 {
        let g: Vec<f64> = f.iter().map(|v| v.abs().powf(q)).collect();
        self.integrate_weighted(&g).powf(1.0 / q)
    }

    /// Relative spread of the speed; zero for arclength grids.
    pub fn speed_spread(&self) -> f64 {
        let max = self.speed.iter().copied().fold(f64::MIN, f64::max);
        let min = self.speed.iter().copied().fold(f64::MAX, f64::min);
        (max - min) / max
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        self.speed_spread() <= tol
    }

    /// `int kappa ds / 2 pi`.
    pub fn turning_number(&self) -> f64 {
        self.integrate(&self.kappa) / (2.0 * PI)
    }

    /// `<x, N>/2 - kappa` at every sample.
    pub fn shrinker_quantity(&self) -> Vec<f64> {
        self.positions
            .iter()
            .zip(&self.normal)
            .zip(&self.kappa)
            .map(|((x, n), k)| 0.5 * (x[0] * n[0] + x[1] * n[1]) - k)
            .collect()
    }

    /// Gaussian area `F = int rho ds`.
    pub fn gaussian_area(&self) -> f64 {
        self.integrate(&self.weight)
    }

    /// Relative variation `(max - min) / mean` of `rho * kappa`.
    pub fn weight_kappa_spread(&self) -> f64 {
        let prod: Vec<f64> = self.weight.iter().zip(&self.kappa).map(|(r, k)| r * k).collect();
        let max = prod.iter().copied().fold(f64::MIN, f64::max);
        let min = prod.iter().copied().fold(f64::MAX, f64::min);
        let mean = prod.iter().sum::<f64>() / prod.len() as f64;
        (max - min) / mean.abs()
    }

    /// Coordinate function `x_i` sampled on the grid.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.positions.iter().map(|p| p[i]).collect()
    }

    /// `<e_i, N>` sampled on the grid.
    pub fn normal_component(&self, i: usize) -> Vec<f64> {
        self.normal.iter().map(|n| n[i]).collect()
    }

    /// Centroid weighted by `rho ds`.
    pub fn weighted_centroid(&self) -> [f64; 2] {
        let mass = self.gaussian_area();
        [
            self.integrate_weighted(&self.coordinate(0)) / mass,
            self.integrate_weighted(&self.coordinate(1)) / mass,
        ]
    }
}
