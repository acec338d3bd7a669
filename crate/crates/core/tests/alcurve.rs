//! Shooting for Abresch-Langer curves and their invariants.

use shrinklab::alcurve::*;
use shrinklab::Error;

#[test]
fn al23_profile_matches_reference_shooting() {
    let p = find_closed_curve(2, 3, DEFAULT_BRACKET).unwrap();
    // independent adaptive Runge-Kutta shooting at rtol 1e-13
    assert!((p.kappa_max - 1.367_259_601_107_798).abs() < 1e-8, "{}", p.kappa_max);
    assert!(p.closure_defect() < 1e-8);
    assert!(p.energy_drift < 1e-10);
    assert!(p.ode_residual() < 1e-6);
}

#[test]
fn one_two_has_no_root_in_bracket() {
    match find_closed_curve(1, 2, DEFAULT_BRACKET) {
        Err(Error::NoSignChange { g_lo, g_hi, .. }) => assert!(g_lo > 0.0 && g_hi > 0.0),
        other => panic!("expected NoSignChange, got {other:?}"),
    }
}

#[test]
fn rotation_ratio_outside_window_has_no_root() {
    assert!(matches!(find_closed_curve(2, 5, DEFAULT_BRACKET), Err(Error::NoSignChange { .. })));
}

#[test]
fn non_coprime_pairs_are_rejected() {
    assert!(matches!(find_closed_curve(2, 4, DEFAULT_BRACKET), Err(Error::Domain(_))));
}

#[test]
fn one_one_is_the_circle() {
    let p = find_closed_curve(1, 1, DEFAULT_BRACKET).unwrap();
    assert!(p.kappa.iter().all(|k| (k - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15));
    let c = reconstruct_curve(&p).unwrap();
    assert!((c.gaussian_area() - circle_gaussian_area(2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn first_integral_is_conserved() {
    let p = integrate_curvature_ode(1.1, 400, 0.02).unwrap();
    let e0 = first_integral(p.kappa[0], p.kappa_dot[0]);
    for (k, kd) in p.kappa.iter().zip(&p.kappa_dot) {
        assert!((first_integral(*k, *kd) - e0).abs() < 1e-12);
    }
}

#[test]
fn integrator_converges_at_high_order() {
    let end = |sub: f64| {
        let p = integrate_with(1.2, 8, 0.5, sub).unwrap();
        (*p.kappa.last().unwrap(), p.end_theta)
    };
    let reference = end(0.01);
    let err = |sub: f64| {
        let (k, t) = end(sub);
        (k - reference.0).abs() + (t - reference.1).abs()
    };
    let errs: Vec<f64> = [0.5, 0.25, 0.125].iter().map(|&s| err(s)).collect();
    let order = (errs[1] / errs[2]).log2();
    assert!(order > 5.0, "observed order {order}");
}

#[test]
fn closure_scan_brackets_the_root() {
    let scan = closure_scan(2, 3, 0.8, 3.0, 12).unwrap();
    let p = find_closed_curve(2, 3, DEFAULT_BRACKET).unwrap();
    let changes = scan.windows(2).filter(|w| w[0].1.signum() != w[1].1.signum()).count();
    assert_eq!(changes, 1);
    let idx = scan.windows(2).position(|w| w[0].1.signum() != w[1].1.signum()).unwrap();
    assert!(scan[idx].0 <= p.kappa_max && p.kappa_max <= scan[idx + 1].0);
}

#[test]
fn reconstruction_satisfies_shrinker_relations() {
    let p = find_closed_curve(2, 3, DEFAULT_BRACKET).unwrap();
    let c = reconstruct_curve(&p).unwrap();
    let rep = reconstruction_report(&p, &c);
    assert_eq!(rep.rotation_index, 2);
    assert!(rep.shrinker_residual < 1e-7);
    assert!(rep.position_identity_residual < 1e-7);
    assert!(rep.weight_kappa_spread < 1e-8);
    assert!((c.turning_number() - 2.0).abs() < 1e-9);
}

#[test]
fn b1_negative_and_consistent() {
    let c = reconstruct_curve(&find_closed_curve(2, 3, DEFAULT_BRACKET).unwrap()).unwrap();
    let b = compute_b1(&c).unwrap();
    assert!(b.route_a < 0.0);
    assert!(b.max_disagreement() < 1e-10);
    let circle = shrinking_circle(128);
    let cb = compute_b1(&circle).unwrap();
    // -sqrt(2 pi)/8 exp(-1/2)
    assert!((cb.route_a - circle_b1()).abs() < 1e-12);
    assert!((circle_b1() + 0.190_043_4).abs() < 1e-7);
}

#[test]
fn al_curves_with_more_lobes_close() {
    for (p, q) in [(3, 5), (4, 7)] {
        let prof = find_closed_curve(p, q, DEFAULT_BRACKET).unwrap();
        let c = reconstruct_curve(&prof).unwrap();
        let rep = reconstruction_report(&prof, &c);
        assert!(rep.closure_defect < 1e-8, "({p},{q}) defect {}", rep.closure_defect);
        assert_eq!(rep.rotation_index, p as i64);
    }
}
