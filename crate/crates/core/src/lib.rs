//! Numerical laboratory for planar self-shrinkers.
//!
//! The crate constructs the round circle and Abresch-Langer curves,
//! computes spectra of their drift Laplacian and Jacobi operator, evaluates
//! the quadratic obstruction calculus on generalised cylinders, checks the
//! variation formulas of the shrinker quantity against finite differences
//! and simulates the rescaled curve-shortening flow.

pub mod acceptance;
pub mod alcurve;
pub mod curve;
pub mod error;
pub mod flow;
pub mod gauss;
pub mod io;
pub mod obstruction;
pub mod periodic;
pub mod report;
pub mod spectral;
pub mod variation;

pub use error::{Error, Result};

/// Version string embedded in every artifact.
pub const VERSION: &str = concat!("shrinklab ", env!("CARGO_PKG_VERSION"));
