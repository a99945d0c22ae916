use std::f64::consts::PI;

use kjplate::hilbert::{cheb_t, fht_forward, fht_tricomi_inverse, range_defect};
use kjplate::{ChebFunction, Complex64, WeightClass};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().enumerate().map(|(j, c)| c * cheb_t(j, x)).sum()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || b - a < 1e-7 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

/// Independent principal-value oracle: subtracts `f(x)` and integrates the
/// difference quotient in `y = cos(theta)` with adaptive Simpson.
fn pv_oracle(full: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let fx = full(x);
    let slope = (full(x + 1e-6) - full(x - 1e-6)) / 2e-6;
    let integrand = |t: f64| {
        let y = t.cos();
        let q = if (x - y).abs() < 1e-9 { -slope } else { (full(y) - fx) / (x - y) };
        q * t.sin()
    };
    (simpson(&integrand, 0.0, PI, 1e-12) + fx * ((1.0 + x) / (1.0 - x)).ln()) / PI
}

fn coeffs(max_degree: usize) -> impl Strategy<Value = Vec<f64>> {
    (0..=max_degree).prop_flat_map(|d| prop::collection::vec(-1.0..1.0f64, d + 1))
}

#[test]
fn forward_matches_independent_oracle() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = (coeffs(10), prop::bool::ANY);
    for _ in 0..20 {
        let (c, sqrt) = strategy.new_tree(&mut runner).unwrap().current();
        let weight = if sqrt { WeightClass::Sqrt } else { WeightClass::Smooth };
        let f = ChebFunction::from_fn(64, weight, |x| poly(&c, x)).unwrap();
        let g = fht_forward(&f).unwrap();
        let full = |y: f64| weight.factor(y) * poly(&c, y);
        for (x, v) in g.nodes().iter().zip(g.values()).step_by(7) {
            let want = pv_oracle(&full, *x);
            assert!((v.re - want).abs() < 1e-8, "x={x} got {} want {want}", v.re);
        }
    }
}

#[test]
fn oracle_reproduces_closed_forms() {
    let sqrt = |y: f64| (1.0 - y * y).sqrt();
    for x in [-0.7, 0.1, 0.55] {
        assert!((pv_oracle(&sqrt, x) - x).abs() < 1e-10);
        let one = |_: f64| 1.0;
        assert!((pv_oracle(&one, x) - ((1.0 + x) / (1.0 - x)).ln() / PI).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn forward_is_linear(f in coeffs(12), h in coeffs(12), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        for weight in [WeightClass::Smooth, WeightClass::Sqrt, WeightClass::InvSqrt] {
            let ff = ChebFunction::from_fn(64, weight, |x| poly(&f, x)).unwrap();
            let hh = ChebFunction::from_fn(64, weight, |x| poly(&h, x)).unwrap();
            let (ca, cb) = (Complex64::new(a, 0.0), Complex64::new(b, 0.0));
            let lhs = fht_forward(&ff.combine(ca, &hh, cb).unwrap()).unwrap();
            let rhs = fht_forward(&ff).unwrap().combine(ca, &fht_forward(&hh).unwrap(), cb).unwrap();
            prop_assert!(lhs.max_diff(&rhs).unwrap() < 1e-12 * (1.0 + rhs.max_abs()));
        }
    }

    #[test]
    fn null_space_is_annihilated(c in -1e3..1e3f64) {
        let f = ChebFunction::from_fn(64, WeightClass::InvSqrt, |_| c).unwrap();
        prop_assert!(fht_forward(&f).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn round_trip_recovers_sqrt_class(c in coeffs(12)) {
        let f = ChebFunction::from_fn(64, WeightClass::Sqrt, |x| poly(&c, x)).unwrap();
        let back = fht_tricomi_inverse(&fht_forward(&f).unwrap(), f.integral() / PI).unwrap();
        let err = back
            .point_values()
            .iter()
            .zip(f.point_values())
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        prop_assert!(err < 1e-8 * (1.0 + f.max_abs()));
    }

    #[test]
    fn image_has_zero_range_defect(c in coeffs(12)) {
        let f = ChebFunction::from_fn(64, WeightClass::Sqrt, |x| poly(&c, x)).unwrap();
        prop_assert!(range_defect(&fht_forward(&f).unwrap()).norm() < 1e-8);
    }
}
