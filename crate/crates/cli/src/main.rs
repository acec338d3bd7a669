//! `shrinklab` command-line driver.
//!
//! Exit codes: 0 when every asserted check passes, 1 when a check fails or a
//! computation errors, 2 for invalid invocations or configurations.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CrossSection, Direction, Operator, Shape, StabilizationArg};

/// Invalid invocation or configuration; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "shrinklab", version, about = "Numerical experiments on planar self-shrinkers")]
pub struct Cli {
    /// Directory for artifacts.
    #[arg(long, global = true, env = "SHRINKLAB_OUT", default_value = "shrinklab-out")]
    pub out: PathBuf,
    /// TOML file with a `seed` and one table per subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed of randomised ensembles.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gaussian moment table and quadrature agreement.
    Moments(MomentsArgs),
    /// Shoot for an Abresch-Langer curve and write it as CSV.
    AlSolve(AlSolveArgs),
    /// Check a curve CSV for the shrinker relations.
    CurveCheck(CurveCheckArgs),
    /// Leading eigenpairs of the Jacobi operator or the drift Laplacian.
    Spectrum(SpectrumArgs),
    /// Check conditions (A1) and (A2).
    VerifyAssumptions(SourceArgs),
    /// Obstruction integral identity and lower bound on random coefficients.
    Obstruction(ObstructionArgs),
    /// First and second variation of the shrinker quantity.
    VariationCheck(VariationArgs),
    /// Gradient inequality on random perturbations.
    Lojasiewicz(LojasiewiczArgs),
    /// Rescaled mean curvature flow of a perturbed circle.
    Flow(FlowArgs),
    /// Run the acceptance battery.
    ReportSuite(SuiteArgs),
}

#[derive(Args, Debug, Default)]
pub struct MomentsArgs {
    #[arg(long)]
    pub max_degree: Option<u32>,
    #[arg(long)]
    pub max_dim: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct AlSolveArgs {
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Search bracket for the maximal curvature.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub bracket: Option<Vec<f64>>,
    #[arg(long)]
    pub max_substep: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct CurveCheckArgs {
    /// Curve CSV written by `al-solve`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct SourceArgs {
    #[arg(long, value_enum)]
    pub shape: Option<Shape>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Curve CSV; takes precedence over `--shape`.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub operator: Option<Operator>,
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct ObstructionArgs {
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub cross_section: Option<CrossSection>,
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Args, Debug, Default)]
pub struct VariationArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
    #[arg(long)]
    pub mode: Option<u32>,
    #[arg(long)]
    pub component: Option<usize>,
    #[arg(long, num_args = 2.., value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, num_args = 2.., value_delimiter = ',')]
    pub taylor_eps: Option<Vec<f64>>,
}

#[derive(Args, Debug, Default)]
pub struct LojasiewiczArgs {
    #[arg(long, value_enum, num_args = 1.., value_delimiter = ',')]
    pub bases: Option<Vec<Shape>>,
    #[arg(long)]
    pub circle_grid: Option<usize>,
    #[arg(long)]
    pub al_grid: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub calibration_samples: Option<usize>,
    #[arg(long)]
    pub amp_min: Option<f64>,
    #[arg(long)]
    pub amp_max: Option<f64>,
    #[arg(long)]
    pub max_mode: Option<usize>,
    #[arg(long)]
    pub safety: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct FlowArgs {
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub modes: Option<Vec<u32>>,
    /// Absolute radial amplitudes, one per mode.
    #[arg(long = "amp", num_args = 1.., value_delimiter = ',')]
    pub amplitudes: Option<Vec<f64>>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub stabilization: Option<StabilizationArg>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub sample_every: Option<usize>,
    #[arg(long)]
    pub phi_floor: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["START", "END"])]
    pub fit_window: Option<Vec<f64>>,
    #[arg(long)]
    pub rate_tolerance: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct SuiteArgs {
    /// Criteria to run, e.g. `AC-1,AC-4`.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub criteria: Option<Vec<String>>,
    /// Replacement moment table (test fixture), JSON `[[alpha, value], ..]`.
    #[arg(long, hide = true)]
    pub moment_table: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
