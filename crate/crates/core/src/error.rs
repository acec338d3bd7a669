//! Library error type.

use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature rule exact to degree {degree} cannot integrate a monomial of degree {requested}")]
    InsufficientDegree { degree: u32, requested: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("curvature integration failed at sigma = {sigma}: {reason}")]
    Integration { sigma: f64, reason: String },

    #[error(
        "closure function has no sign change on [{lo}, {hi}] for (p, q) = ({p}, {q}): g(lo) = {g_lo:e}, g(hi) = {g_hi:e}"
    )]
    NoSignChange {
        p: u32,
        q: u32,
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("profile does not close: angular defect {defect:e}")]
    NonClosing { defect: f64 },

    #[error("grid is not uniform in arclength (relative speed spread {spread:e})")]
    NonUniformGrid { spread: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("curve is not a shrinker: max |phi| = {residual:e} exceeds {tolerance:e}")]
    NotShrinker { residual: f64, tolerance: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("flow terminated at s = {s}: {reason}")]
    FlowTermination { s: f64, reason: String },

    #[error("fit refused: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
