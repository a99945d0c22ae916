use kjplate::hilbert::cheb_t;
use kjplate::possio::{extend_to_line, solve_possio_with, LineGrid, PossioBasis, PossioProblem, SolvePath};
use kjplate::{ChebFunction, WeightClass};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn smooth_downwash_meets_residual_certificate(
        c in prop::collection::vec(-1.0..1.0f64, 5),
        alpha in 0.5..3.0f64,
        beta in -5.0..5.0f64,
        u in 0.0..0.9f64,
    ) {
        let line = LineGrid::new(8.0, 2048).unwrap();
        let basis = PossioBasis::new(24, line).unwrap();
        let d = ChebFunction::from_fn(24, WeightClass::Smooth, |x| {
            c.iter().enumerate().map(|(j, a)| a * cheb_t(j, x)).sum()
        })
        .unwrap();
        let problem = PossioProblem::new(d, alpha, beta, u, line).unwrap();
        for path in [SolvePath::Direct, SolvePath::Decomposed] {
            let s = solve_possio_with(&basis, &problem, path).unwrap();
            prop_assert!(s.residual < 1e-6, "{} residual {}", path.label(), s.residual);
            let samples = extend_to_line(&s.psi_hat, &line);
            for (k, v) in samples.iter().enumerate() {
                if line.x(k).abs() >= 1.0 {
                    prop_assert_eq!(v.norm(), 0.0);
                }
            }
        }
    }
}
