//! Normal variations of planar shrinkers.

use std::f64::consts::SQRT_2;

use proptest::prelude::*;
use shrinklab::alcurve::{find_closed_curve, reconstruct_curve, shrinking_circle, DEFAULT_BRACKET};
use shrinklab::curve::ClosedCurve;
use shrinklab::variation::*;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn jacobi_action_on_circle_modes() {
    let c = shrinking_circle(128);
    for j in 0..6 {
        let v = NormalField::from_fn(&c, |s| (j as f64 * s / SQRT_2).cos()).unwrap();
        let lv = jacobi_action(&c, &v).unwrap();
        let mu = 1.0 - (j * j) as f64 / 2.0;
        let err: Vec<f64> = lv.iter().zip(&v.values).map(|(a, b)| a - mu * b).collect();
        assert!(max_abs(&err) < 1e-10, "mode {j}");
    }
}

#[test]
fn al_symmetries_are_jacobi_fields() {
    let c = reconstruct_curve(&find_closed_curve(2, 3, DEFAULT_BRACKET).unwrap()).unwrap();
    let kappa = NormalField::new(&c, c.kappa.clone()).unwrap();
    let lk = jacobi_action(&c, &kappa).unwrap();
    let err: Vec<f64> = lk.iter().zip(&c.kappa).map(|(a, b)| a - b).collect();
    assert!(max_abs(&err) < 1e-8);
    let n1 = NormalField::new(&c, c.normal_component(0)).unwrap();
    let ln = jacobi_action(&c, &n1).unwrap();
    let err: Vec<f64> = ln.iter().zip(&n1.values).map(|(a, b)| a - 0.5 * b).collect();
    assert!(max_abs(&err) < 1e-6, "{}", max_abs(&err));
}

#[test]
fn second_variation_formula_on_circle_mode() {
    // d2 phi = 2 kappa (-kappa^2 v^2 - 2 v v'' - v'^2) for v = cos(2 s / sqrt2)
    let c = shrinking_circle(64);
    let w = 2.0 / SQRT_2;
    let v = NormalField::from_fn(&c, |s| (w * s).cos()).unwrap();
    let q = second_variation_formula(&c, &v);
    let k = 1.0 / SQRT_2;
    for (i, s) in c.sigma().iter().enumerate() {
        let (vv, dv, ddv) = ((w * s).cos(), -w * (w * s).sin(), -w * w * (w * s).cos());
        let expected = 2.0 * k * (-k * k * vv * vv - 2.0 * vv * ddv - dv * dv);
        assert!((q[i] - expected).abs() < 1e-10);
    }
}

#[test]
fn checks_refuse_non_shrinker_bases() {
    let c = ClosedCurve::circle(1.0, 64);
    let v = NormalField::zero(&c);
    assert!(first_variation_check(&c, &v, &[1e-2, 5e-3]).is_err());
}

#[test]
fn first_variation_converges_linearly() {
    let c = shrinking_circle(128);
    let v = NormalField::from_fn(&c, |s| 0.2 + (3.0 * s / SQRT_2).sin()).unwrap();
    let r = first_variation_check(&c, &v, &[1e-2, 5e-3, 2.5e-3]).unwrap();
    assert!(r.pass);
    assert!((r.slope.unwrap() - 1.0).abs() < 0.1);
    assert!(r.limit_error < 1e-6);
}

#[test]
fn second_variation_within_budget_on_al() {
    let c = reconstruct_curve(&find_closed_curve(2, 3, DEFAULT_BRACKET).unwrap()).unwrap();
    let v = NormalField::new(&c, c.normal_component(1)).unwrap();
    let r = second_variation_check(&c, &v, &[1e-2, 5e-3, 2.5e-3]).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn gaussian_area_expansion_is_quadratic() {
    let c = shrinking_circle(128);
    let v = NormalField::from_fn(&c, |s| (2.0 * s / SQRT_2).cos()).unwrap();
    let r = f_expansion_check(&c, &v, &[2e-2, 1e-2, 5e-3]).unwrap();
    assert!(r.pass, "{r:?}");
    let ratio = r.scaled_gaps[0] / r.scaled_gaps[2];
    assert!((ratio - 1.0).abs() < 0.05);
}

#[test]
fn ensemble_is_deterministic() {
    let cfg = EnsembleConfig {
        samples: 20,
        calibration_samples: 20,
        ..EnsembleConfig::default()
    };
    let a = lojasiewicz_gradient_check(&[shrinking_circle(64)], &cfg).unwrap();
    let b = lojasiewicz_gradient_check(&[shrinking_circle(64)], &cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dilation_is_exact(c0 in -1.0f64..1.0, eps in 1e-3f64..5e-2) {
        let c = shrinking_circle(32);
        let v = NormalField::new(&c, vec![c0; 32]).unwrap();
        let p = perturbed_curve(&c, &v, eps).unwrap();
        let r = SQRT_2 + eps * c0;
        prop_assert!(p.kappa.iter().all(|k| (k - 1.0 / r).abs() < 1e-12));
    }

    #[test]
    fn jacobi_action_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let c = shrinking_circle(64);
        let f = NormalField::from_fn(&c, |s| (s / SQRT_2).sin()).unwrap();
        let g = NormalField::from_fn(&c, |s| (4.0 * s / SQRT_2).cos()).unwrap();
        let h = NormalField::new(&c, f.values.iter().zip(&g.values).map(|(x, y)| a * x + b * y).collect()).unwrap();
        let lf = jacobi_action(&c, &f).unwrap();
        let lg = jacobi_action(&c, &g).unwrap();
        let lh = jacobi_action(&c, &h).unwrap();
        for i in 0..64 {
            prop_assert!((lh[i] - a * lf[i] - b * lg[i]).abs() < 1e-10);
        }
    }
}
