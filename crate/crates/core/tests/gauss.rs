//! Gaussian moments, quadrature, incomplete gamma and the Poincare inequality.

use proptest::prelude::*;
use shrinklab::gauss::*;

/// `E[y^a]` for one coordinate of variance 2: `2^(a/2) (a-1)!!`.
fn one_dim_moment(a: u32) -> u128 {
    if a % 2 == 1 {
        return 0;
    }
    let mut v: u128 = 1;
    let mut k = a as u128;
    while k > 1 {
        v *= k - 1;
        k -= 2;
    }
    v << (a / 2)
}

#[test]
fn table_matches_double_factorial_oracle() {
    for (alpha, value) in MOMENT_TABLE {
        let oracle: u128 = alpha.iter().map(|&a| one_dim_moment(a)).product();
        assert_eq!(oracle, value, "{alpha:?}");
    }
}

#[test]
fn odd_entries_vanish() {
    let a = MultiIndex::new(vec![2, 3]);
    assert!(a.has_odd_entry());
    assert_eq!(gaussian_moment(&a), 0.0);
    assert_eq!(gaussian_moment_exact(&a).unwrap(), 0);
}

#[test]
fn quadrature_degree_is_enforced() {
    let rule = QuadratureRule::gauss_hermite(2);
    assert_eq!(rule.degree(), 3);
    assert!(moment_by_quadrature(&MultiIndex::new(vec![4]), &rule).is_err());
}

#[test]
fn quadrature_weights_sum_to_one() {
    for d in 1..=3 {
        let rule = QuadratureRule::tensor(6, d);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}

#[test]
fn incomplete_gamma_closed_forms() {
    for x in [0.1, 1.0, 3.7, 12.0, 40.0] {
        assert!((gamma_q(1.0, x) - (-x as f64).exp()).abs() <= 1e-13 * (-x as f64).exp().max(1e-300));
        let e3 = (-x as f64).exp() * (1.0 + x + x * x / 2.0);
        assert!(((gamma_q(3.0, x) - e3) / e3).abs() < 1e-12);
    }
    // Q(1/2, 1) = erfc(1), mpmath reference
    assert!((gamma_q(0.5, 1.0) - 0.157_299_207_050_285_130_7).abs() < 1e-14);
}

#[test]
fn cutoff_tail_domain_and_anchor() {
    assert!(cutoff_tail(1, 0, 0.5).is_err());
    assert!(cutoff_tail(0, 0, 2.0).is_err());
    // n = 1, m = 0: int_{|y|>R} rho_1 dy = 2 sqrt(pi) erfc(R/2) with the unnormalised weight
    let t = cutoff_tail(1, 0, 2.0).unwrap();
    assert!((t - 0.557_611_170_561_323_953).abs() < 1e-12, "{t}");
}

#[test]
fn poincare_anchors() {
    let rule = QuadratureRule::gauss_hermite(6);
    let n = rule.len();
    let (l, r) = gaussian_poincare_check(&rule, &vec![1.0; n], &vec![vec![0.0]; n]).unwrap();
    assert!((l - 0.5).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
    let y: Vec<f64> = (0..n).map(|i| rule.node(i)[0]).collect();
    let (l, r) = gaussian_poincare_check(&rule, &y, &vec![vec![1.0]; n]).unwrap();
    assert!((l - 3.0).abs() < 1e-12 && (r - 6.0).abs() < 1e-12);
}

#[test]
fn poincare_rejects_mismatched_samples() {
    let rule = QuadratureRule::gauss_hermite(4);
    assert!(gaussian_poincare_check(&rule, &[1.0], &[vec![0.0]]).is_err());
}

proptest! {
    #[test]
    fn moments_agree_across_routes(alpha in proptest::collection::vec(0u32..5, 1..4)) {
        let a = MultiIndex::new(alpha.clone());
        let oracle: u128 = alpha.iter().map(|&e| one_dim_moment(e)).product();
        prop_assert_eq!(gaussian_moment_exact(&a).unwrap(), oracle);
        let rule = QuadratureRule::exact_for(a.degree(), a.dimension());
        let q = moment_by_quadrature(&a, &rule).unwrap();
        prop_assert!((q - oracle as f64).abs() <= 1e-10 * (oracle as f64).max(1.0));
    }

    #[test]
    fn poincare_holds_for_cubics(c in proptest::collection::vec(-2.0f64..2.0, 4)) {
        let rule = QuadratureRule::gauss_hermite(12);
        let n = rule.len();
        let p = |y: f64| c[0] + c[1] * y + c[2] * y * y + c[3] * y * y * y;
        let dp = |y: f64| c[1] + 2.0 * c[2] * y + 3.0 * c[3] * y * y;
        let vals: Vec<f64> = (0..n).map(|i| p(rule.node(i)[0])).collect();
        let grads: Vec<Vec<f64>> = (0..n).map(|i| vec![dp(rule.node(i)[0])]).collect();
        let (l, r) = gaussian_poincare_check(&rule, &vals, &grads).unwrap();
        prop_assert!(l <= r * (1.0 + 1e-12));
    }

    #[test]
    fn cutoff_tail_decreases(n in 1u32..4, m in 0u32..7, r in 1.0f64..9.0) {
        prop_assert!(cutoff_tail(n, m, r + 0.5).unwrap() < cutoff_tail(n, m, r).unwrap());
    }
}
