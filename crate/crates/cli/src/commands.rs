//! Subcommand implementations.

use std::f64::consts::{PI, SQRT_2};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use shrinklab::acceptance::{self, CriterionResult, SuiteReport};
use shrinklab::alcurve::{
    compute_b1, find_closed_curve_with, reconstruct_curve, shrinking_circle, ShootingOptions,
};
use shrinklab::curve::ClosedCurve;
use shrinklab::flow::{decay_rate_fit, energy_identity_check, simulate, FlowConfig, InitialData, Trajectory};
use shrinklab::gauss::{gaussian_moment, gaussian_moment_exact, moment_by_quadrature, MultiIndex, QuadratureRule, MOMENT_TABLE};
use shrinklab::io::{read_curve_csv, write_curve_csv, write_eigenfunctions_csv, write_json, write_scatter_csv, write_trajectory_csv};
use shrinklab::obstruction::CrossSectionInvariants;
use shrinklab::report::ReportRow;
use shrinklab::spectral::{build_operator, eigensolve, AssumptionTolerances, OperatorKind};
use shrinklab::variation::{
    f_expansion_check, first_variation_check, lojasiewicz_gradient_check, second_variation_check,
    taylor_remainder_check, EnsembleConfig, NormalField,
};
use shrinklab::{Error, VERSION};

use crate::config::*;
use crate::override_fields;
use crate::{Cli, Command, SourceArgs, UsageError};

/// Library errors caused by invalid parameters become usage errors.
fn lib(e: Error) -> anyhow::Error {
    match e {
        Error::Domain(_) | Error::InsufficientDegree { .. } | Error::DimensionMismatch { .. } | Error::Parse(_) => {
            UsageError(e.to_string()).into()
        }
        other => other.into(),
    }
}

/// Output directory, header and row collection of one run.
struct Run {
    out: PathBuf,
    header: Value,
}

impl Run {
    fn new<P: Serialize>(cli: &Cli, command: &str, seed: u64, params: &P) -> anyhow::Result<Self> {
        std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
        Ok(Self {
            out: cli.out.clone(),
            header: json!({
                "version": VERSION,
                "command": command,
                "seed": seed,
                "parameters": params,
            }),
        })
    }

    fn create(&self, name: &str) -> anyhow::Result<BufWriter<File>> {
        let path = self.out.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    /// Writes `{header, passed, rows, data}` and prints the rows.
    fn finish(&self, name: &str, rows: &[ReportRow], data: Value) -> anyhow::Result<bool> {
        let passed = rows.iter().all(ReportRow::passed);
        let report = json!({
            "header": self.header,
            "passed": passed,
            "rows": rows,
            "data": data,
        });
        write_json(self.create(name)?, &report)?;
        print_rows(rows);
        let failing: Vec<_> = rows.iter().filter(|r| !r.passed()).collect();
        if !failing.is_empty() {
            eprintln!("{} failing check(s):", failing.len());
            for r in failing {
                eprintln!("  {} [{}]: value {:e}, expected {:?}, tolerance {:e}", r.check_id, r.anchor, r.value, r.expected, r.tolerance);
            }
        }
        println!("wrote {}", self.out.join(name).display());
        Ok(passed)
    }
}

fn print_rows(rows: &[ReportRow]) {
    for r in rows {
        println!(
            "{:<4} {:<44} {:>15.8e}  {:<30}",
            if r.passed() { "ok" } else { "FAIL" },
            r.check_id,
            r.value,
            r.anchor
        );
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<bool> {
    let file = ConfigFile::load(cli.config.as_deref())?;
    let seed = cli.seed.or(file.seed).unwrap_or(acceptance::DEFAULT_SEED);
    match &cli.command {
        Command::Moments(a) => {
            let mut p = file.moments.unwrap_or_default();
            override_fields!(p, a; max_degree, max_dim);
            moments(&Run::new(cli, "moments", seed, &p)?, &p)
        }
        Command::AlSolve(a) => {
            let mut p = file.al_solve.unwrap_or_default();
            override_fields!(p, a; p, q, grid, max_substep);
            if let Some(b) = &a.bracket {
                p.bracket = [b[0], b[1]];
            }
            al_solve(&Run::new(cli, "al-solve", seed, &p)?, &p)
        }
        Command::CurveCheck(a) => {
            let mut p = file.curve_check.unwrap_or_default();
            if a.input.is_some() {
                p.input = a.input.clone();
            }
            override_fields!(p, a; tolerance);
            curve_check(&Run::new(cli, "curve-check", seed, &p)?, &p)
        }
        Command::Spectrum(a) => {
            let mut p = file.spectrum.unwrap_or_default();
            let mut s = p.source();
            apply_source(&mut s, &a.source);
            (p.shape, p.p, p.q, p.grid, p.input) = (s.shape, s.p, s.q, s.grid, s.input);
            override_fields!(p, a; operator, count);
            spectrum(&Run::new(cli, "spectrum", seed, &p)?, &p)
        }
        Command::VerifyAssumptions(a) => {
            let mut p = file.verify_assumptions.unwrap_or_default();
            apply_source(&mut p, a);
            verify_assumptions(&Run::new(cli, "verify-assumptions", seed, &p)?, &p)
        }
        Command::Obstruction(a) => {
            let mut p = file.obstruction.unwrap_or_default();
            override_fields!(p, a; max_dim, samples, cross_section, k);
            obstruction(&Run::new(cli, "obstruction", seed, &p)?, &p, seed)
        }
        Command::VariationCheck(a) => {
            let mut p = file.variation_check.unwrap_or_default();
            let mut s = p.source();
            apply_source(&mut s, &a.source);
            (p.shape, p.p, p.q, p.grid, p.input) = (s.shape, s.p, s.q, s.grid, s.input);
            override_fields!(p, a; direction, mode, component, eps, taylor_eps);
            variation(&Run::new(cli, "variation-check", seed, &p)?, &p)
        }
        Command::Lojasiewicz(a) => {
            let mut p = file.lojasiewicz.unwrap_or_default();
            override_fields!(p, a; bases, circle_grid, al_grid, samples, calibration_samples, amp_min, amp_max, max_mode, safety);
            lojasiewicz(&Run::new(cli, "lojasiewicz", seed, &p)?, &p, seed)
        }
        Command::Flow(a) => {
            let mut p = file.flow.unwrap_or_default();
            override_fields!(p, a; modes, amplitudes, radius, dt, steps, stabilization, grid, sample_every, phi_floor, rate_tolerance);
            if let Some(w) = &a.fit_window {
                p.fit_window = Some([w[0], w[1]]);
            }
            flow(&Run::new(cli, "flow", seed, &p)?, &p)
        }
        Command::ReportSuite(a) => {
            let mut p = file.report_suite.unwrap_or_default();
            override_fields!(p, a; criteria);
            if a.moment_table.is_some() {
                p.moment_table = a.moment_table.clone();
            }
            report_suite(&Run::new(cli, "report-suite", seed, &p)?, &p, seed)
        }
    }
}

fn apply_source(p: &mut SourceParams, a: &SourceArgs) {
    override_fields!(p, a; shape, p, q, grid);
    if a.input.is_some() {
        p.input = a.input.clone();
    }
}

fn load_curve(path: &Path) -> anyhow::Result<ClosedCurve> {
    let f = File::open(path).map_err(|e| UsageError(format!("opening {}: {e}", path.display())))?;
    Ok(read_curve_csv(f).map_err(lib)?.1)
}

fn shoot(p: u32, q: u32, grid: usize, bracket: [f64; 2], max_substep: f64) -> anyhow::Result<(shrinklab::alcurve::CurvatureProfile, ClosedCurve)> {
    let opts = ShootingOptions {
        grid,
        max_substep,
        ..ShootingOptions::default()
    };
    let profile = find_closed_curve_with(p, q, (bracket[0], bracket[1]), &opts).map_err(lib)?;
    let curve = reconstruct_curve(&profile).map_err(lib)?;
    Ok((profile, curve))
}

fn source_curve(s: &SourceParams) -> anyhow::Result<(String, ClosedCurve)> {
    if let Some(path) = &s.input {
        return Ok((path.display().to_string(), load_curve(path)?));
    }
    if s.grid < 16 || s.grid % 2 != 0 {
        return Err(UsageError(format!("grid must be even and at least 16, got {}", s.grid)).into());
    }
    match s.shape {
        Shape::Circle => Ok(("circle".into(), shrinking_circle(s.grid))),
        Shape::Al => {
            let d = AlSolveParams::default();
            let (_, c) = shoot(s.p, s.q, s.grid, d.bracket, d.max_substep)?;
            Ok((format!("AL({},{})", s.p, s.q), c))
        }
    }
}

fn indices(m: usize, degree: u32) -> Vec<Vec<u32>> {
    if m == 1 {
        return vec![vec![degree]];
    }
    (0..=degree)
        .flat_map(|first| {
            indices(m - 1, degree - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn moments(run: &Run, p: &MomentsParams) -> anyhow::Result<bool> {
    if p.max_dim == 0 || p.max_dim > 6 {
        return Err(UsageError(format!("max_dim must lie in 1..=6, got {}", p.max_dim)).into());
    }
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for (alpha, value) in MOMENT_TABLE {
        let a = MultiIndex::new(alpha.to_vec());
        if a.degree() > p.max_degree {
            continue;
        }
        let exact = gaussian_moment_exact(&a).map_err(lib)?;
        let quad = moment_by_quadrature(&a, &QuadratureRule::exact_for(a.degree(), a.dimension())).map_err(lib)?;
        println!("alpha {:<10} table {:>5}  exact {:>5}  gamma {:>10.4}  quadrature {:>12.8}", format!("{alpha:?}"), value, exact, gaussian_moment(&a), quad);
        rows.push(ReportRow::equal(&format!("table {alpha:?}"), "moment table", exact as f64, value as f64, 0.0));
        table.push(json!({"alpha": alpha, "table": value, "exact": exact, "gamma": gaussian_moment(&a), "quadrature": quad}));
    }
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for m in 1..=p.max_dim {
        for degree in (0..=p.max_degree).step_by(2) {
            let rule = QuadratureRule::exact_for(degree, m);
            for alpha in indices(m, degree) {
                let a = MultiIndex::new(alpha);
                let q = moment_by_quadrature(&a, &rule).map_err(lib)?;
                worst = worst.max((q - gaussian_moment(&a)).abs());
                count += 1;
            }
        }
    }
    rows.push(ReportRow::at_most("quadrature against gamma formula", "moment quadrature", worst, 1e-10));
    run.finish("moments.json", &rows, json!({"table": table, "checked_indices": count}))
}

fn al_solve(run: &Run, p: &AlSolveParams) -> anyhow::Result<bool> {
    let (profile, curve) = shoot(p.p, p.q, p.grid, p.bracket, p.max_substep)?;
    let name = format!("AL({},{})", p.p, p.q);
    let rows = acceptance::shrinker_rows(&name, &profile, &curve).map_err(lib)?;
    let stem = format!("al_{}_{}", p.p, p.q);
    write_curve_csv(run.create(&format!("{stem}.csv"))?, &curve, &run.header)?;
    let b1 = compute_b1(&curve).map_err(lib)?;
    let data = json!({
        "kappa_max": profile.kappa_max,
        "period": profile.period,
        "length": curve.length(),
        "first_integral": profile.first_integral,
        "energy_drift": profile.energy_drift,
        "weight_constant": curve.weight_constant,
        "gaussian_area": curve.gaussian_area(),
        "b1": b1,
    });
    run.finish(&format!("{stem}.json"), &rows, data)
}

fn curve_check(run: &Run, p: &CurveCheckParams) -> anyhow::Result<bool> {
    let path = p.input.as_ref().ok_or_else(|| UsageError("curve-check needs --input".into()))?;
    let curve = load_curve(path)?;
    let phi = curve.shrinker_quantity();
    let residual = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let b1 = compute_b1(&curve).map_err(lib)?;
    let rows = vec![
        ReportRow::at_most("speed spread", "uniform parametrisation", curve.speed_spread(), p.tolerance),
        ReportRow::at_most("shrinker residual", "x/2 - H = 0", residual, p.tolerance),
        ReportRow::at_most("rho kappa spread", "rho = c / kappa", curve.weight_kappa_spread(), p.tolerance),
        ReportRow::at_most("B1 route agreement", "B1 routes", b1.max_disagreement(), p.tolerance),
        ReportRow::flag("B1 negative", "-(c/2) int kappa^3 < 0", b1.route_a < 0.0),
    ];
    let data = json!({
        "samples": curve.len(),
        "length": curve.length(),
        "turning_number": curve.turning_number(),
        "gaussian_area": curve.gaussian_area(),
        "b1": b1,
    });
    run.finish("curve_check.json", &rows, data)
}

fn spectrum(run: &Run, p: &SpectrumParams) -> anyhow::Result<bool> {
    let (name, curve) = source_curve(&p.source())?;
    let kind = match p.operator {
        Operator::Jacobi => OperatorKind::Jacobi,
        Operator::DriftLaplacian => OperatorKind::DriftLaplacian,
    };
    let op = build_operator(&curve, kind).map_err(lib)?;
    let eig = eigensolve(&op, p.count).map_err(lib)?;
    let worst = eig.pairs.iter().fold(0.0f64, |m, e| m.max(e.residual));
    let rows = vec![
        ReportRow::at_most(&format!("{name} symmetry defect"), "self-adjoint in L2(rho)", op.symmetry_defect(), 1e-8),
        ReportRow::at_most(&format!("{name} eigenpair residual"), "eigen-solve", worst, 1e-6),
    ];
    for (i, c) in eig.clusters.iter().enumerate() {
        println!("cluster {i:>2}: {:>14.10}  multiplicity {}", c.value, c.multiplicity);
    }
    let functions: Vec<Vec<f64>> = eig.pairs.iter().map(|e| e.eigenfunction.clone()).collect();
    write_eigenfunctions_csv(run.create("eigenfunctions.csv")?, &curve, &functions, &run.header)?;
    let data = json!({
        "curve": name,
        "eigenvalues": eig.eigenvalues(),
        "clusters": eig.clusters,
        "residuals": eig.pairs.iter().map(|e| e.residual).collect::<Vec<_>>(),
    });
    run.finish("spectrum.json", &rows, data)
}

fn verify_assumptions(run: &Run, p: &SourceParams) -> anyhow::Result<bool> {
    let (name, curve) = source_curve(p)?;
    let tol = AssumptionTolerances::default();
    let rows = acceptance::assumption_rows(&name, &curve, &tol).map_err(lib)?;
    let a2 = shrinklab::spectral::verify_a2(&curve, &tol).map_err(lib)?;
    run.finish("assumptions.json", &rows, json!({"curve": name, "tolerances": tol, "other_in_window": a2.other_in_window}))
}

fn obstruction(run: &Run, p: &ObstructionParams, seed: u64) -> anyhow::Result<bool> {
    if p.max_dim == 0 || p.max_dim > shrinklab::obstruction::MAX_BRUTEFORCE_DIM {
        return Err(UsageError(format!("max_dim must lie in 1..={}", shrinklab::obstruction::MAX_BRUTEFORCE_DIM)).into());
    }
    let mut rows = acceptance::obstruction_identity_rows(p.max_dim, p.samples, seed).map_err(lib)?;
    let (name, inv): (String, Box<dyn Fn(u32) -> shrinklab::Result<CrossSectionInvariants>>) = match p.cross_section {
        CrossSection::Circle => ("circle".into(), Box::new(CrossSectionInvariants::circle)),
        CrossSection::Sphere => {
            let k = p.k;
            (format!("sphere{k}"), Box::new(move |d| CrossSectionInvariants::sphere(k, d)))
        }
    };
    let invariants = inv(1).map_err(lib)?;
    rows.extend(acceptance::lower_bound_rows(&name, inv, p.max_dim, p.samples, seed).map_err(lib)?);
    run.finish("obstruction.json", &rows, json!({"cross_section": name, "lambda": invariants.lambda, "b1": invariants.b1}))
}

fn variation(run: &Run, p: &VariationParams) -> anyhow::Result<bool> {
    let (name, curve) = source_curve(&p.source())?;
    let v = match p.direction {
        Direction::Kappa => NormalField::new(&curve, curve.kappa.clone()),
        Direction::Mode => {
            let w = 2.0 * PI * p.mode as f64 / curve.length();
            NormalField::from_fn(&curve, |s| (w * s).cos())
        }
        Direction::Normal => {
            if p.component > 1 {
                return Err(UsageError(format!("component must be 0 or 1, got {}", p.component)).into());
            }
            NormalField::new(&curve, curve.normal_component(p.component))
        }
    }
    .map_err(lib)?;
    let label = format!("{name} {:?}", p.direction).to_lowercase();
    let first = first_variation_check(&curve, &v, &p.eps).map_err(lib)?;
    let second = second_variation_check(&curve, &v, &p.eps).map_err(lib)?;
    let taylor = taylor_remainder_check(&curve, &v, &p.taylor_eps).map_err(lib)?;
    let fexp = f_expansion_check(&curve, &v, &p.taylor_eps).map_err(lib)?;
    let mut rows = acceptance::first_variation_rows(&label, &first);
    rows.push(acceptance::second_variation_row(&label, &second));
    rows.extend(acceptance::taylor_rows(&label, &taylor));
    rows.push(ReportRow::at_most(&format!("{label} F expansion ratio variation"), "F expansion", fexp.ratio_variation, 0.2));
    run.finish(
        "variation.json",
        &rows,
        json!({"first": first, "second": second, "taylor": taylor, "f_expansion": fexp}),
    )
}

fn lojasiewicz(run: &Run, p: &LojasiewiczParams, seed: u64) -> anyhow::Result<bool> {
    if p.bases.is_empty() {
        return Err(UsageError("at least one base curve is required".into()).into());
    }
    let mut bases = Vec::new();
    for b in &p.bases {
        let s = SourceParams {
            shape: *b,
            grid: if *b == Shape::Circle { p.circle_grid } else { p.al_grid },
            ..SourceParams::default()
        };
        bases.push(source_curve(&s)?.1);
    }
    let cfg = EnsembleConfig {
        samples: p.samples,
        calibration_samples: p.calibration_samples,
        amp_min: p.amp_min,
        amp_max: p.amp_max,
        max_mode: p.max_mode,
        seed,
        safety: p.safety,
        ..EnsembleConfig::default()
    };
    let rep = lojasiewicz_gradient_check(&bases, &cfg).map_err(lib)?;
    write_scatter_csv(run.create("lojasiewicz_scatter.csv")?, &rep.samples, &run.header)?;
    let rows = acceptance::gradient_rows(&rep, 1);
    let data = json!({
        "constant": rep.constant,
        "max_ratio": rep.max_ratio,
        "violations": rep.violations,
        "excluded": rep.excluded,
        "min_exponent": rep.min_exponent,
        "median_exponent": rep.median_exponent,
    });
    run.finish("lojasiewicz.json", &rows, data)
}

/// Window from `s = 0.5` to the last sample whose mode amplitude exceeds `1e-10`.
fn auto_window(traj: &Trajectory, mode: usize) -> [f64; 2] {
    let end = traj
        .states
        .iter()
        .filter(|s| s.mode_amplitudes.get(mode).is_some_and(|a| a.abs() > 1e-10))
        .map(|s| s.s)
        .fold(0.0, f64::max);
    [0.5_f64.min(0.5 * end), end]
}

fn flow(run: &Run, p: &FlowParams) -> anyhow::Result<bool> {
    let config = FlowConfig {
        dt: p.dt,
        steps: p.steps,
        stabilization: p.stabilization.into(),
        initial: InitialData {
            radius: p.radius,
            modes: p.modes.clone(),
            amplitudes: p.amplitudes.clone(),
        },
        grid_size: p.grid,
        sample_every: p.sample_every,
        phi_floor: p.phi_floor,
    };
    config.validate().map_err(lib)?;
    let traj = simulate(&config).map_err(lib)?;
    write_trajectory_csv(run.create("trajectory.csv")?, &traj, &run.header)?;
    let dissipation: f64 = traj.records.iter().map(|r| r.phi_sq * config.dt).sum();
    let f_scale = traj.states.first().map(|s| s.f).unwrap_or(0.0);
    let budget = config.dt * dissipation + traj.records.len() as f64 * 4.0 * f64::EPSILON * f_scale;
    let mut rows = vec![ReportRow::at_most("F increase", "F non-increasing", traj.increase_total, budget)];
    let mut fit = Value::Null;
    let lowest = p.modes.iter().copied().filter(|&j| j >= 2).min();
    if let (Some(j), true) = (lowest, (p.radius - SQRT_2).abs() < 1e-12) {
        let window = p.fit_window.unwrap_or_else(|| auto_window(&traj, j as usize));
        let expected = 1.0 - (j * j) as f64 / 2.0;
        let rate = decay_rate_fit(&traj, j as usize, (window[0], window[1])).unwrap_or(f64::NAN);
        rows.push(ReportRow::equal(&format!("mode {j} decay rate"), "1 - j^2/2", rate, expected, p.rate_tolerance * expected.abs().max(1.0)));
        fit = json!({"mode": j, "window": window, "rate": rate, "expected": expected});
    }
    let energy = energy_identity_check(&traj).ok();
    let last = traj.states.last();
    let data = json!({
        "final_s": last.map(|s| s.s),
        "final_phi_l2": last.map(|s| s.phi_l2),
        "final_shrinker_scale": last.map(|s| s.shrinker_scale),
        "reached_floor": traj.reached_floor,
        "increase_total": traj.increase_total,
        "decay_fit": fit,
        "energy_relative_mismatch": energy.map(|e| e.relative_mismatch),
    });
    run.finish("flow.json", &rows, data)
}

fn load_table(path: &Path) -> anyhow::Result<Vec<(Vec<u32>, u128)>> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("opening {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("moment table {}: {e}", path.display())).into())
}

fn report_suite(run: &Run, p: &SuiteParams, seed: u64) -> anyhow::Result<bool> {
    for id in &p.criteria {
        if !acceptance::CRITERIA.contains(&id.as_str()) {
            return Err(UsageError(format!("unknown criterion {id}")).into());
        }
    }
    let table = p.moment_table.as_deref().map(load_table).transpose()?;
    let mut results: Vec<CriterionResult> = Vec::new();
    for id in acceptance::CRITERIA.iter().filter(|c| p.criteria.iter().any(|x| x == *c)) {
        let start = Instant::now();
        let result = match (*id, &table) {
            ("AC-1", Some(t)) => {
                let refs: Vec<(&[u32], u128)> = t.iter().map(|(a, v)| (a.as_slice(), *v)).collect();
                acceptance::ac1(&refs)
            }
            _ => acceptance::run_criterion(id, seed).expect("known criterion"),
        };
        let elapsed = start.elapsed();
        let limit = acceptance::runtime_limit(id);
        println!(
            "{} [{:.2} s of {} s{}]",
            result.headline(),
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if elapsed > limit { ", over budget" } else { "" }
        );
        print!("{}", result.details());
        results.push(result);
    }
    let report = SuiteReport::from_results(seed, results);
    let doc = json!({"header": run.header, "suite": report});
    write_json(run.create("suite.json")?, &doc)?;
    println!("wrote {}", run.out.join("suite.json").display());
    println!("suite {}", if report.passed { "PASS" } else { "FAIL" });
    Ok(report.passed)
}
