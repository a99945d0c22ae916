use std::f64::consts::PI;

use kjplate::flowmap::{apply_a0, solve_zaremba, FlowField, FlowSystem};
use kjplate::HalfPlaneGrid;

const L: f64 = 3.0;
const DEPTH: f64 = 2.0;
const U: f64 = 0.5;

/// Periodic in `x`, flat at the top, nonzero on both parts of `z = 0`.
fn exact(x: f64, z: f64) -> f64 {
    let (k, m) = (PI / L, PI / (2.0 * DEPTH));
    (k * x).cos() * (m * (z - DEPTH)).cos() + (k * x).sin()
}

fn source(x: f64, z: f64) -> f64 {
    let (k, m) = (PI / L, PI / (2.0 * DEPTH));
    let c = 1.0 - U * U;
    -(c * k * k + m * m) * (k * x).cos() * (m * (z - DEPTH)).cos() - c * k * k * (k * x).sin()
}

/// Errors of the manufactured Zaremba solve: energy seminorm, weighted L2
/// away from the junctions at `x = +-1, z = 0`.
fn zaremba_errors(h: f64) -> (f64, f64) {
    let g = HalfPlaneGrid::uniform(L, DEPTH, h).unwrap();
    let mut f = vec![0.0; g.nodes()];
    for j in 0..g.rows() {
        for i in 0..g.nx {
            f[g.node(i, j)] = source(g.x(i), g.z(j));
        }
    }
    let m = PI / (2.0 * DEPTH);
    // outward normal at z = 0 is -z
    let g_n: Vec<f64> = g.omega_columns().iter().map(|&i| -m * (PI / L * g.x(i)).cos()).collect();
    let g_d: Vec<f64> = (0..g.nx).filter(|&i| g.is_kutta(i, 0)).map(|i| exact(g.x(i), 0.0)).collect();
    let s = solve_zaremba(&g, &f, &g_n, &g_d, U).unwrap();
    let w = g.weights();
    let mut err = vec![0.0; g.nodes()];
    let mut l2 = 0.0;
    for j in 0..g.rows() {
        for i in 0..g.nx {
            let n = g.node(i, j);
            err[n] = s.w[n] - exact(g.x(i), g.z(j));
            let near = (g.x(i).abs() - 1.0).abs().hypot(g.z(j)) < 0.5;
            if !near {
                l2 += w[n] * err[n] * err[n];
            }
        }
    }
    let k = g.dirichlet_form(1.0 - U * U, 1.0).to_csr();
    let energy: f64 = err.iter().zip(k.apply(&err)).map(|(a, b)| a * b).sum();
    (energy.sqrt(), l2.sqrt())
}

#[test]
fn zaremba_reproduces_manufactured_solution() {
    let errs: Vec<(f64, f64)> = [0.25, 0.125, 0.0625].into_iter().map(zaremba_errors).collect();
    eprintln!("zaremba errors {errs:?}");
    for pair in errs.windows(2) {
        let (e0, e1) = (pair[0], pair[1]);
        assert!((e0.0 / e1.0).log2() >= 0.9, "energy order {errs:?}");
        assert!((e0.1 / e1.1).log2() >= 1.7, "L2 order {errs:?}");
    }
}

/// Energy-product skew defect of the flow generator on two compactly
/// supported fields that vanish near `z = 0` and the top.
fn skew_defect(h: f64) -> f64 {
    let g = HalfPlaneGrid::uniform(L, DEPTH, h).unwrap();
    let bump = |x: f64, z: f64, cx: f64, cz: f64| {
        let r2 = ((x - cx) / 0.8).powi(2) + ((z - cz) / 0.6).powi(2);
        if r2 < 1.0 {
            (1.0 - r2).powi(4)
        } else {
            0.0
        }
    };
    let a = FlowField::from_fn(g, |x, z| bump(x, z, 0.3, 1.0), |x, z| bump(x, z, -0.2, 0.9) * x);
    let b = FlowField::from_fn(g, |x, z| bump(x, z, -0.4, 1.1) * z, |x, z| bump(x, z, 0.1, 1.0));
    let sys = FlowSystem::new(g, U).unwrap();
    let inner = |p: &FlowField, q: &FlowField| -> f64 {
        let (yp, yq) = (sys.pack(p), sys.pack(q));
        yp.iter().zip(sys.gram_apply(&yq)).map(|(x, y)| x * y).sum()
    };
    let (aa, ab) = (apply_a0(&a, U).unwrap(), apply_a0(&b, U).unwrap());
    (inner(&aa, &b) + inner(&a, &ab)).abs() / (inner(&a, &a).sqrt() * inner(&b, &b).sqrt())
}

#[test]
fn flow_operator_is_skew_under_refinement() {
    let d: Vec<f64> = [0.25, 0.125, 0.0625].into_iter().map(skew_defect).collect();
    eprintln!("skew defects {d:?}");
    for pair in d.windows(2) {
        assert!(pair[1] <= (pair[0] / 1.8).max(1e-12), "{d:?}");
    }
}
