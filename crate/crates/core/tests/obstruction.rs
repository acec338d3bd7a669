//! Second-order obstruction integrals and the lower bound.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shrinklab::gauss::QuadratureRule;
use shrinklab::obstruction::*;

/// `int u^2 (y_b^2 - 2) rho_d` by tensor Gauss-Hermite quadrature.
fn quadrature_integral(a: &QuadCoeffs, b: usize) -> f64 {
    let rule = QuadratureRule::exact_for(6, a.dim());
    rule.integrate(|y| {
        let u = a.evaluate(y);
        u * u * (y[b] * y[b] - 2.0)
    })
}

fn coeffs_strategy() -> impl Strategy<Value = QuadCoeffs> {
    (1usize..=4).prop_flat_map(|d| {
        proptest::collection::vec(-1.0f64..1.0, d * (d + 1) / 2)
            .prop_map(move |up| QuadCoeffs::from_upper(d, &up).unwrap())
    })
}

#[test]
fn evaluate_uses_centred_hermite_form() {
    let a = QuadCoeffs::new(2, vec![1.0, 0.5, 0.5, 0.0]).unwrap();
    // u = (y1^2 - 2) + y1 y2
    assert!((a.evaluate(&[1.0, 3.0]) - 2.0).abs() < 1e-15);
}

#[test]
fn asymmetric_input_is_rejected() {
    assert!(QuadCoeffs::new(2, vec![1.0, 0.5, 0.4, 0.0]).is_err());
    assert!(QuadCoeffs::new(2, vec![1.0]).is_err());
}

#[test]
fn jacobi_norm_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inv = CrossSectionInvariants::circle(3).unwrap();
    for _ in 0..20 {
        let a = random_coeffs(3, &mut rng);
        let rule = QuadratureRule::exact_for(4, 3);
        let l2 = rule.integrate(|y| a.evaluate(y).powi(2));
        assert!((jacobi_norm(&a, &inv) - inv.lambda * l2).abs() < 1e-10 * l2.max(1.0));
    }
}

#[test]
fn sphere_invariants() {
    let s2 = CrossSectionInvariants::sphere(2, 1).unwrap();
    // F(S^2 of radius 2) = 4/e
    assert!((s2.lambda - 4.0 / std::f64::consts::E).abs() < 1e-14);
    assert!(s2.b1 < 0.0);
    assert_eq!(s2.codim_split, (2, 3, 4));
}

#[test]
fn bruteforce_dimension_cap() {
    assert!(quadratic_projection_bruteforce(&QuadCoeffs::zeros(MAX_BRUTEFORCE_DIM + 1), 0).is_err());
}

#[test]
fn unequal_rows_give_strict_inequality() {
    let inv = CrossSectionInvariants::circle(2).unwrap();
    let lb = obstruction_lower_bound(&QuadCoeffs::new(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap(), &inv).unwrap();
    assert!((lb.ratio() - 2f64.sqrt()).abs() < 1e-12);
    assert!(obstruction_lower_bound(&QuadCoeffs::zeros(2), &inv).is_err());
}

proptest! {
    #[test]
    fn bruteforce_matches_quadrature_and_closed_identity(a in coeffs_strategy()) {
        for b in 0..a.dim() {
            let brute = quadratic_projection_bruteforce(&a, b).unwrap();
            let quad = quadrature_integral(&a, b);
            prop_assert!((brute - quad).abs() < 1e-10);
            prop_assert!((brute - 64.0 * a.row_sq(b)).abs() < 1e-10);
        }
    }

    #[test]
    fn lower_bound_holds(a in coeffs_strategy(), k in 1u32..4) {
        prop_assume!(a.frobenius_sq() > 1e-8);
        let inv = CrossSectionInvariants::sphere(k, a.dim() as u32).unwrap();
        let lb = obstruction_lower_bound(&a, &inv).unwrap();
        prop_assert!(lb.lhs >= lb.rhs * (1.0 - 1e-12));
    }

    #[test]
    fn obstruction_is_quadratic(a in coeffs_strategy(), t in 0.1f64..10.0) {
        let inv = CrossSectionInvariants::circle(a.dim() as u32).unwrap();
        let base = quadratic_projection_closedform(&a, 0, &inv).unwrap();
        let scaled = quadratic_projection_closedform(&a.scaled(t), 0, &inv).unwrap();
        prop_assert!((scaled - t * t * base).abs() <= 1e-12 * (t * t * base).abs().max(1e-12));
        prop_assert!((jacobi_norm(&a.scaled(t), &inv) - t * t * jacobi_norm(&a, &inv)).abs()
            <= 1e-12 * jacobi_norm(&a, &inv).max(1e-12) * t * t);
    }
}
