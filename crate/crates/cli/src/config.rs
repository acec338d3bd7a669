//! Experiment parameters: defaults, overridden by a TOML file, overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use shrinklab::flow::Stabilization;

use crate::UsageError;

/// Base curve of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Circle,
    Al,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    Jacobi,
    DriftLaplacian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CrossSection {
    Circle,
    Sphere,
}

/// Normal direction of a variation experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `v = kappa`.
    Kappa,
    /// `v = cos(j * 2 pi sigma / length)`.
    Mode,
    /// `v = <e_i, N>`.
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StabilizationArg {
    None,
    Recenter,
    ProjectUnstable,
}

impl From<StabilizationArg> for Stabilization {
    fn from(s: StabilizationArg) -> Self {
        match s {
            StabilizationArg::None => Stabilization::None,
            StabilizationArg::Recenter => Stabilization::Recenter,
            StabilizationArg::ProjectUnstable => Stabilization::ProjectUnstable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsParams {
    pub max_degree: u32,
    pub max_dim: usize,
}

impl Default for MomentsParams {
    fn default() -> Self {
        Self {
            max_degree: 8,
            max_dim: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlSolveParams {
    pub p: u32,
    pub q: u32,
    pub grid: usize,
    pub bracket: [f64; 2],
    pub max_substep: f64,
}

impl Default for AlSolveParams {
    fn default() -> Self {
        Self {
            p: 2,
            q: 3,
            grid: 512,
            bracket: [0.72, 5.0],
            max_substep: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveCheckParams {
    pub input: Option<PathBuf>,
    pub tolerance: f64,
}

impl Default for CurveCheckParams {
    fn default() -> Self {
        Self {
            input: None,
            tolerance: 1e-6,
        }
    }
}

/// Curve selection shared by several subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceParams {
    pub shape: Shape,
    pub p: u32,
    pub q: u32,
    pub grid: usize,
    /// Curve CSV; takes precedence over `shape`.
    pub input: Option<PathBuf>,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            shape: Shape::Al,
            p: 2,
            q: 3,
            grid: 512,
            input: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumParams {
    pub shape: Shape,
    pub p: u32,
    pub q: u32,
    pub grid: usize,
    pub input: Option<PathBuf>,
    pub operator: Operator,
    pub count: usize,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        let s = SourceParams::default();
        Self {
            shape: s.shape,
            p: s.p,
            q: s.q,
            grid: s.grid,
            input: s.input,
            operator: Operator::Jacobi,
            count: 12,
        }
    }
}

impl SpectrumParams {
    pub fn source(&self) -> SourceParams {
        SourceParams {
            shape: self.shape,
            p: self.p,
            q: self.q,
            grid: self.grid,
            input: self.input.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObstructionParams {
    pub max_dim: usize,
    pub samples: usize,
    pub cross_section: CrossSection,
    /// Sphere dimension when `cross_section = "sphere"`.
    pub k: u32,
}

impl Default for ObstructionParams {
    fn default() -> Self {
        Self {
            max_dim: 4,
            samples: 1000,
            cross_section: CrossSection::Circle,
            k: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationParams {
    pub shape: Shape,
    pub p: u32,
    pub q: u32,
    pub grid: usize,
    pub input: Option<PathBuf>,
    pub direction: Direction,
    pub mode: u32,
    pub component: usize,
    pub eps: Vec<f64>,
    pub taylor_eps: Vec<f64>,
}

impl Default for VariationParams {
    fn default() -> Self {
        let s = SourceParams::default();
        Self {
            shape: s.shape,
            p: s.p,
            q: s.q,
            grid: s.grid,
            input: s.input,
            direction: Direction::Kappa,
            mode: 2,
            component: 0,
            eps: vec![1e-2, 5e-3, 2.5e-3],
            taylor_eps: vec![2e-2, 1e-2, 5e-3],
        }
    }
}

impl VariationParams {
    pub fn source(&self) -> SourceParams {
        SourceParams {
            shape: self.shape,
            p: self.p,
            q: self.q,
            grid: self.grid,
            input: self.input.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LojasiewiczParams {
    pub bases: Vec<Shape>,
    pub circle_grid: usize,
    pub al_grid: usize,
    pub samples: usize,
    pub calibration_samples: usize,
    pub amp_min: f64,
    pub amp_max: f64,
    pub max_mode: usize,
    pub safety: f64,
}

impl Default for LojasiewiczParams {
    fn default() -> Self {
        Self {
            bases: vec![Shape::Circle, Shape::Al],
            circle_grid: 256,
            al_grid: 512,
            samples: 300,
            calibration_samples: 100,
            amp_min: 1e-4,
            amp_max: 1e-2,
            max_mode: 6,
            safety: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    pub modes: Vec<u32>,
    pub amplitudes: Vec<f64>,
    pub radius: f64,
    pub dt: f64,
    pub steps: usize,
    pub stabilization: StabilizationArg,
    pub grid: usize,
    pub sample_every: usize,
    pub phi_floor: f64,
    /// Window of the decay fit; chosen from the trajectory when absent.
    pub fit_window: Option<[f64; 2]>,
    pub rate_tolerance: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            modes: vec![2],
            amplitudes: vec![1e-2],
            radius: std::f64::consts::SQRT_2,
            dt: 1e-3,
            steps: 8000,
            stabilization: StabilizationArg::ProjectUnstable,
            grid: 256,
            sample_every: 20,
            phi_floor: 1e-9,
            fit_window: None,
            rate_tolerance: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteParams {
    pub criteria: Vec<String>,
    /// Replacement moment table, as `[[alpha, value], ..]` JSON.
    pub moment_table: Option<PathBuf>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            criteria: shrinklab::acceptance::CRITERIA.iter().map(|s| s.to_string()).collect(),
            moment_table: None,
        }
    }
}

/// Layout of the `--config` TOML file: an optional seed and one table per subcommand.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub moments: Option<MomentsParams>,
    pub al_solve: Option<AlSolveParams>,
    pub curve_check: Option<CurveCheckParams>,
    pub spectrum: Option<SpectrumParams>,
    pub verify_assumptions: Option<SourceParams>,
    pub obstruction: Option<ObstructionParams>,
    pub variation_check: Option<VariationParams>,
    pub lojasiewicz: Option<LojasiewiczParams>,
    pub flow: Option<FlowParams>,
    pub report_suite: Option<SuiteParams>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }
}

/// Overwrites `$target` with each flag that was given.
#[macro_export]
macro_rules! override_fields {
    ($target:expr, $flags:expr; $($field:ident),* $(,)?) => {
        $(if let Some(v) = $flags.$field.clone() { $target.$field = v.into(); })*
    };
}
