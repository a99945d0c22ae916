use kjplate::symbols::{abs_m, case_bound, eval_big_m, eval_d, eval_m, eval_m_factored, Case};
use kjplate::{Complex64, SymbolPoint};
use proptest::prelude::*;

fn nonzero(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi, prop::bool::ANY).prop_map(|(v, neg)| if neg { -v } else { v })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn factorization_holds_off_the_axis(
        alpha in 0.1..10.0f64,
        beta in -10.0..10.0f64,
        eta_x in nonzero(0.01, 100.0),
        eta_y in -10.0..10.0f64,
        u in 0.0..0.99f64,
    ) {
        let p = SymbolPoint::new(alpha, beta, eta_x, eta_y, u).unwrap();
        let f = eval_m_factored(&p);
        prop_assume!(!f.branch_ambiguous);
        prop_assert!(f.mismatch().unwrap() < 1e-12 * (1.0 + f.m.norm()));
    }

    #[test]
    fn principal_branch(
        alpha in 0.1..10.0f64,
        beta in -10.0..10.0f64,
        eta_x in -100.0..100.0f64,
        eta_y in -10.0..10.0f64,
        u in 0.0..0.99f64,
    ) {
        let p = SymbolPoint::new(alpha, beta, eta_x, eta_y, u).unwrap();
        let root = -eval_m(&p) * (p.tau() + Complex64::new(0.0, u * eta_x));
        prop_assert!(root.re >= -1e-12 * (1.0 + root.norm()));
        prop_assert!((root * root - eval_d(&p)).norm() < 1e-10 * (1.0 + eval_d(&p).norm()));
    }

    #[test]
    fn reflection_symmetry_without_flow(alpha in 0.1..10.0f64, beta in -10.0..10.0f64, eta in -100.0..100.0f64) {
        let a = eval_m(&SymbolPoint::one_d(alpha, beta, eta, 0.0).unwrap()).norm();
        let b = eval_m(&SymbolPoint::one_d(alpha, -beta, -eta, 0.0).unwrap()).norm();
        prop_assert!((a - b).abs() < 1e-13 * (1.0 + a));
    }

    #[test]
    fn multiplier_magnitude_matches_direct_formula(
        alpha in 0.1..10.0f64,
        beta in -10.0..10.0f64,
        eta in nonzero(1e-3, 100.0),
        u in 0.0..0.99f64,
    ) {
        let p = SymbolPoint::one_d(alpha, beta, eta, u).unwrap();
        let w = Complex64::new(alpha, beta + u * eta);
        let direct = w.norm() / ((w * w + eta * eta).norm().sqrt() * (1.0 + eta * eta).powf(0.25));
        let got = eval_big_m(&p).unwrap().m.norm();
        prop_assert!((got - direct).abs() < 1e-12 * (1.0 + direct));
        prop_assert!((abs_m(alpha, p.z_u(), eta) - direct).abs() < 1e-12 * (1.0 + direct));
    }

    #[test]
    fn outer_case_bounds_hold(alpha in 0.1..10.0f64, z_u in -100.0..100.0f64, eta in -100.0..100.0f64) {
        let case = Case::classify(z_u, eta);
        prop_assume!(case != Case::B);
        prop_assert!(abs_m(alpha, z_u, eta) <= case_bound(case, alpha, eta, 0.25) * (1.0 + 1e-12));
    }
}
