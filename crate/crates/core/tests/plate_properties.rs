use kjplate::plate::{biharmonic_lambda1, plate_force, potential_gradient_check, vk_bracket, PlateOperator};
use kjplate::{Nonlinearity, PlateGrid};
use proptest::prelude::*;

/// First positive root of `cos z cosh z = 1` by bisection.
fn clamped_beam_root() -> f64 {
    let f = |z: f64| z.cos() * z.cosh() - 1.0;
    let (mut lo, mut hi) = (4.0, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn first_eigenvalue_matches_clamped_beam() {
    let root = clamped_beam_root();
    assert!((root - 4.730040745).abs() < 1e-8);
    // beam of length 2: lambda = (root / 2)^4
    let exact = (root / 2.0).powi(4);
    let lam = biharmonic_lambda1(&PlateGrid::interval(64).unwrap()).unwrap();
    assert!((lam.extrapolated - exact).abs() / exact < 1e-4, "{} vs {exact}", lam.extrapolated);
    assert!((lam.fine - exact).abs() > (lam.extrapolated - exact).abs());
}

fn bump_1d(c: &[f64]) -> impl Fn(f64, f64) -> f64 + '_ {
    move |x, _| (1.0 - x * x).powi(2) * (c[0] + c[1] * x + c[2] * (2.0 * x).sin() + c[3] * x * x)
}

fn bump_2d(c: &[f64]) -> impl Fn(f64, f64) -> f64 + '_ {
    move |x, y| {
        let s = x * (1.0 - x) * y * (1.0 - y);
        16.0 * s * s * (c[0] + c[1] * x + c[2] * (3.0 * y).cos() + c[3] * x * y)
    }
}

fn kinds(two_d: Option<&PlateGrid>) -> Vec<Nonlinearity> {
    match two_d {
        None => vec![
            Nonlinearity::Kirchhoff { cubic: 1.0, linear: -2.0 },
            Nonlinearity::Berger { kappa: 1.0, gamma: 0.5 },
        ],
        Some(g) => vec![Nonlinearity::VonKarman {
            f0: g.sample(|x, y| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()),
        }],
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn force_is_gradient_of_potential(
        u in prop::collection::vec(-2.0..2.0f64, 4),
        h in prop::collection::vec(-2.0..2.0f64, 4),
    ) {
        let line = PlateGrid::interval(32).unwrap();
        let square = PlateGrid::rectangle(8, 8, 1.0, 1.0).unwrap();
        for (grid, two_d) in [(line, false), (square, true)] {
            let op = PlateOperator::new(grid).unwrap();
            let (uu, hh) = if two_d {
                (grid.sample(bump_2d(&u)), grid.sample(bump_2d(&h)))
            } else {
                (grid.sample(bump_1d(&u)), grid.sample(bump_1d(&h)))
            };
            for kind in kinds(two_d.then_some(&grid)) {
                let e = potential_gradient_check(&op, &uu, &hh, &kind, 1e-5).unwrap();
                prop_assert!(e < 1e-5, "{} error {e}", kind.label());
            }
        }
    }
}

#[test]
fn bracket_is_symmetric_under_refinement() {
    let fields = [[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [1.0, -1.0, 0.0, 1.0]];
    let defect = |n: usize| {
        let grid = PlateGrid::rectangle(n, n, 1.0, 1.0).unwrap();
        let op = PlateOperator::new(grid).unwrap();
        let [u, w, z] = fields.map(|c| grid.sample(bump_2d(&c)));
        let uw = vk_bracket(&grid, &grid.extend(&u), &grid.extend(&w)).unwrap();
        let uz = vk_bracket(&grid, &grid.extend(&u), &grid.extend(&z)).unwrap();
        (op.mass_dot(&uw, &z) - op.mass_dot(&uz, &w)).abs()
    };
    let d: Vec<f64> = [8, 16, 32].into_iter().map(defect).collect();
    for pair in d.windows(2) {
        assert!(pair[1] <= (pair[0] / 1.8).max(1e-12), "defects {d:?}");
    }
}

#[test]
fn lipschitz_constant_is_stable_under_refinement() {
    use rand::{Rng, SeedableRng};
    let estimate = |cells: usize, kind: &Nonlinearity| {
        let grid = PlateGrid::interval(cells).unwrap();
        let op = PlateOperator::new(grid).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut draw = |radius: f64| {
            let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = grid.sample(bump_1d(&c));
            let s = radius * rng.gen_range(0.1..1.0f64) / op.laplacian_norm_sq(&u).sqrt();
            u.into_iter().map(|v| v * s).collect::<Vec<f64>>()
        };
        let mut worst = 0.0f64;
        for _ in 0..40 {
            let (a, b) = (draw(1.0), draw(1.0));
            let (fa, fb) = (plate_force(&op, &a, kind).unwrap(), plate_force(&op, &b, kind).unwrap());
            let df: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x - y).collect();
            let du: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            worst = worst.max((op.mass_dot(&df, &df) / op.laplacian_norm_sq(&du)).sqrt());
        }
        worst
    };
    for kind in kinds(None) {
        let (coarse, fine) = (estimate(32, &kind), estimate(64, &kind));
        assert!(coarse.is_finite() && coarse > 0.0);
        assert!((fine / coarse - 1.0).abs() < 0.1, "{}: {coarse} vs {fine}", kind.label());
    }
}
