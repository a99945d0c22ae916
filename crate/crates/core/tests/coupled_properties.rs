use kjplate::coupled::{evolve, normalized, random_smooth_state, SystemOperator};
use kjplate::{HalfPlaneGrid, Nonlinearity};
use proptest::prelude::*;

fn system(h: f64, u: f64) -> SystemOperator {
    SystemOperator::new(HalfPlaneGrid::uniform(4.0, 2.0, h).unwrap(), u).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn linear_run_without_flow_conserves_norm(seed in 0u64..1_000_000) {
        let sys = system(0.25, 0.0);
        let y0 = normalized(&sys, &random_smooth_state(&sys, seed)).unwrap();
        let run = evolve(&sys, &y0, 0.5, 0.01, None).unwrap();
        let start = sys.y_norm(&sys.pack(&y0).unwrap());
        let end = sys.y_norm(&sys.pack(&run.final_state).unwrap());
        prop_assert!((end / start - 1.0).abs() < 1e-10);
        prop_assert!(run.reports.iter().all(|r| r.e_pl >= 0.0 && r.e_fl >= 0.0));
    }

    #[test]
    fn pinned_trace_stays_zero(seed in 0u64..1_000_000, u in 0.0..0.9f64) {
        let sys = system(0.25, u);
        let y0 = random_smooth_state(&sys, seed);
        let berger = Nonlinearity::Berger { kappa: 1.0, gamma: 0.5 };
        let run = evolve(&sys, &y0, 0.2, 0.01, Some(&berger)).unwrap();
        prop_assert_eq!(run.kutta_max, 0.0);
    }
}

/// `||y1(T) - y2(T)|| / ||y1(0) - y2(0)||` for a Berger run and a nearby one.
fn dependence_constant(h: f64, dt: f64) -> f64 {
    let sys = system(h, 0.5);
    let berger = Nonlinearity::Berger { kappa: 1.0, gamma: 0.5 };
    let a = random_smooth_state(&sys, 11);
    let b = random_smooth_state(&sys, 12);
    let ya = sys.pack(&a).unwrap();
    let yb: Vec<f64> = ya.iter().zip(sys.pack(&b).unwrap()).map(|(p, q)| p + 1e-3 * q).collect();
    let b = sys.unpack(&yb, 0.0);
    let ra = evolve(&sys, &a, 0.5, dt, Some(&berger)).unwrap();
    let rb = evolve(&sys, &b, 0.5, dt, Some(&berger)).unwrap();
    let diff = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(x, y)| x - y).collect() };
    let end = diff(&sys.pack(&ra.final_state).unwrap(), &sys.pack(&rb.final_state).unwrap());
    sys.y_norm(&end) / sys.y_norm(&diff(&ya, &yb))
}

#[test]
fn continuous_dependence_constant_is_stable() {
    let c = [dependence_constant(0.25, 0.02), dependence_constant(0.25, 0.01), dependence_constant(0.125, 0.01)];
    eprintln!("dependence constants {c:?}");
    let (lo, hi) = c.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    assert!(lo > 0.0 && hi / lo < 1.5, "{c:?}");
}
