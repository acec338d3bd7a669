//! Acceptance criteria AC-1 to AC-9, one test per criterion.

use std::io::Write;
use std::time::Instant;

use shrinklab::acceptance::{run_criterion, runtime_limit, DEFAULT_SEED};

fn check(id: &str) {
    let start = Instant::now();
    let result = run_criterion(id, DEFAULT_SEED).expect("known criterion");
    let elapsed = start.elapsed();
    let limit = runtime_limit(id);
    let in_time = elapsed <= limit;
    // bypasses libtest capture so the headline shows in every run
    let _ = writeln!(
        std::io::stdout().lock(),
        "{} [{:.2} s of {} s]{}",
        result.headline(),
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { " RUNTIME EXCEEDED" }
    );
    print!("{}", result.details());
    for row in &result.rows {
        println!(
            "    {:<4} {:<48} {:>14.6e}  tol {:e}",
            if row.passed() { "ok" } else { "FAIL" },
            row.check_id,
            row.value,
            row.tolerance
        );
    }
    assert!(result.passed, "{id} failed");
    assert!(in_time, "{id} exceeded its runtime budget");
}

#[test]
fn ac_1_moment_table() {
    check("AC-1");
}

#[test]
fn ac_2_obstruction_identity() {
    check("AC-2");
}

#[test]
fn ac_3_obstruction_lower_bound() {
    check("AC-3");
}

#[test]
fn ac_4_shrinker_curves() {
    check("AC-4");
}

#[test]
fn ac_5_assumptions() {
    check("AC-5");
}

#[test]
fn ac_6_variation_formulas() {
    check("AC-6");
}

#[test]
fn ac_7_gradient_inequality() {
    check("AC-7");
}

#[test]
fn ac_8_flow_dynamics() {
    check("AC-8");
}

#[test]
fn ac_9_gaussian_inequalities() {
    check("AC-9");
}
