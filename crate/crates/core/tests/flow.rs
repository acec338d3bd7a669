//! Rescaled mean curvature flow of radial graphs.

use std::f64::consts::SQRT_2;

use shrinklab::flow::*;

fn config(modes: Vec<u32>, amps: Vec<f64>, stab: Stabilization, steps: usize) -> FlowConfig {
    FlowConfig {
        steps,
        stabilization: stab,
        initial: InitialData {
            radius: SQRT_2,
            modes,
            amplitudes: amps,
        },
        ..FlowConfig::default()
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = FlowConfig::default();
    c.dt = 0.0;
    assert!(simulate(&c).is_err());
    let mut c = FlowConfig::default();
    c.grid_size = 63;
    assert!(c.validate().is_err());
    let c = config(vec![2], vec![], Stabilization::None, 10);
    assert!(c.validate().is_err());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let json = r#"{"dt":0.001,"steps":5,"stabilization":"none","initial":{"radius":1.4,"modes":[],"amplitudes":[]},"grid_size":64,"sample_every":1,"phi_floor":0,"extra":1}"#;
    assert!(serde_json::from_str::<FlowConfig>(json).is_err());
}

#[test]
fn circle_of_other_radius_moves_toward_or_away_from_sqrt2() {
    // r' = -(r/2 - 1/r): r = sqrt2 is repelling under the rescaled flow
    let mut c = config(vec![], vec![], Stabilization::None, 100);
    c.initial.radius = 1.5;
    let t = simulate(&c).unwrap();
    let r_end = t.states.last().unwrap().radial[0];
    let r = |s: f64| (2.0 + (1.5f64 * 1.5 - 2.0) * s.exp()).sqrt();
    assert!((r_end - r(0.1)).abs() < 1e-4, "{r_end} vs {}", r(0.1));
}

#[test]
fn projected_mode_two_decays_at_unit_rate() {
    let mut c = config(vec![2], vec![1e-2], Stabilization::ProjectUnstable, 6000);
    c.sample_every = 20;
    let t = simulate(&c).unwrap();
    let rate = decay_rate_fit(&t, 2, (1.0, 5.0)).unwrap();
    assert!((rate + 1.0).abs() < 0.05, "{rate}");
    assert!(t.increase_total < 1e-10);
}

#[test]
fn energy_identity_is_first_order() {
    let mut c = config(vec![2, 3], vec![1e-2, 5e-3], Stabilization::None, 500);
    c.dt = 2e-3;
    let rep = energy_identity_order(&c).unwrap();
    assert!((rep.order - 1.0).abs() < 0.2, "{rep:?}");
}

#[test]
fn shrinker_scale_definition() {
    let phi: f64 = 1e-3;
    let r = shrinker_scale(phi);
    assert!(((-r * r / 2.0).exp() - phi * phi).abs() < 1e-15);
    assert_eq!(shrinker_scale(0.0), f64::INFINITY);
    assert_eq!(shrinker_scale(2.0), 0.0);
}

#[test]
fn simulation_is_deterministic() {
    let c = config(vec![3], vec![1e-2], Stabilization::Recenter, 200);
    assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
}

#[test]
fn decay_fit_needs_resolved_amplitudes() {
    let c = config(vec![], vec![], Stabilization::None, 50);
    let t = simulate(&c).unwrap();
    assert!(decay_rate_fit(&t, 2, (0.0, 0.05)).is_err());
}
