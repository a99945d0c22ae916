//! Coupled flow-plate evolution in the 1D-plate / 2D-flow reduction.
//!
//! The state vector is `[phi; psi_unknowns; u; v]`. The generator splits as
//! `J = J_A + J_P`: `J_A` carries the flow operator, the plate, the pressure
//! `gamma[psi]` and the downwash `d_z phi = v`; `J_P` carries the remaining
//! downwash term `U u_x`. In the energy inner product
//! `((y, y)) = ||grad phi||^2 + ||psi||^2 + ||Delta u||^2 + ||v||^2` the part
//! `J_A` is exactly skew, so implicit midpoint conserves energy at `U = 0`
//! and satisfies the energy relation with midpoint-evaluated work for
//! `U > 0`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flowmap::{FlowField, FlowSystem, HalfPlaneGrid};
use crate::plate::{central_slope, plate_force, plate_potential, Nonlinearity, PlateGrid, PlateOperator, PlateState};
use crate::possio::bump;
use crate::sparse::{dot, Csr, Factorization, Triplets};
use crate::tolerances;

/// Flow, plate and flow speed at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub flow: FlowField,
    pub plate: PlateState,
    pub u: f64,
    pub time: f64,
}

/// Energy components after one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyReport {
    pub time: f64,
    pub e_pl: f64,
    pub e_fl: f64,
    pub e_total: f64,
    /// Trapezoidal `U int <u_x, gamma[psi]> dt`.
    pub boundary_work: f64,
    pub potential: f64,
    /// `E_total + Pi + work - E_total(0) - Pi(0)`.
    pub residual: f64,
}

/// Assembled generator and energy pieces for one grid and flow speed.
#[derive(Debug)]
pub struct SystemOperator {
    pub flow: FlowSystem,
    pub plate: PlateOperator,
    pub j_a: Triplets,
    pub j_p: Triplets,
    plate_stiffness: Csr,
}

impl SystemOperator {
    pub fn new(grid: HalfPlaneGrid, u: f64) -> Result<Self> {
        let flow = FlowSystem::new(grid, u)?;
        let plate = PlateOperator::new(PlateGrid::interval(grid.plate_cells())?)?;
        let (nf, np) = (flow.n_flow(), plate.dim());
        let n = nf + 2 * np;
        let (off_u, off_v) = (nf, nf + np);
        let gain = flow.trace_gain();
        let mut j_a = Triplets::new(n, n);
        j_a.add_block(0, 0, &flow.generator(), 1.0);
        let cell = plate.cell();
        for (r, c, v) in plate.stiffness().iter() {
            j_a.add(off_v + r, off_u + c, -v / cell);
        }
        let mut j_p = Triplets::new(n, n);
        let h = grid.hx();
        for (k, &node) in flow.omega_nodes.iter().enumerate() {
            let row = flow.n_phi() + flow.psi_index[node].expect("Omega nodes carry psi");
            j_a.add(row, off_v + k, -gain);
            j_a.add(off_u + k, off_v + k, 1.0);
            j_a.add(off_v + k, row, 1.0);
            if k + 1 < np {
                j_p.add(row, off_u + k + 1, -gain * u / (2.0 * h));
            }
            if k > 0 {
                j_p.add(row, off_u + k - 1, gain * u / (2.0 * h));
            }
        }
        let plate_stiffness = plate.stiffness().to_csr();
        Ok(Self { flow, plate, j_a, j_p, plate_stiffness })
    }

    pub fn grid(&self) -> HalfPlaneGrid {
        self.flow.grid
    }

    pub fn speed(&self) -> f64 {
        self.flow.u
    }

    pub fn dim(&self) -> usize {
        self.flow.n_flow() + 2 * self.plate.dim()
    }

    fn off_u(&self) -> usize {
        self.flow.n_flow()
    }

    fn off_v(&self) -> usize {
        self.flow.n_flow() + self.plate.dim()
    }

    pub fn u_part<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[self.off_u()..self.off_v()]
    }

    pub fn v_part<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[self.off_v()..]
    }

    pub fn pack(&self, s: &CoupledState) -> Result<Vec<f64>> {
        if s.flow.grid != self.grid() || s.plate.u.len() != self.plate.dim() {
            return Err(Error::Incompatible("state does not match the system grid".into()));
        }
        let mut y = self.flow.pack(&s.flow);
        y.extend_from_slice(&s.plate.u);
        y.extend_from_slice(&s.plate.v);
        Ok(y)
    }

    pub fn unpack(&self, y: &[f64], time: f64) -> CoupledState {
        CoupledState {
            flow: self.flow.unpack(&y[..self.flow.n_flow()]),
            plate: PlateState {
                grid: self.plate.grid,
                u: self.u_part(y).to_vec(),
                v: self.v_part(y).to_vec(),
            },
            u: self.speed(),
            time,
        }
    }

    /// `(E_pl, E_fl)`.
    pub fn energies(&self, y: &[f64]) -> (f64, f64) {
        let u = self.u_part(y);
        let v = self.v_part(y);
        let e_pl = 0.5 * (dot(u, &self.plate_stiffness.apply(u)) + self.plate.cell() * dot(v, v));
        let e_fl = 0.5 * self.flow.energy_norm_sq(&y[..self.flow.n_flow()]);
        (e_pl, e_fl)
    }

    pub fn y_norm(&self, y: &[f64]) -> f64 {
        let (a, b) = self.energies(y);
        (2.0 * (a + b)).sqrt()
    }

    /// `<u_x, gamma[psi]>_Omega`.
    pub fn trace_pairing(&self, y: &[f64]) -> f64 {
        let ux = central_slope(&self.plate.grid, self.u_part(y));
        let np = self.flow.n_phi();
        let h = self.grid().hx();
        self.flow
            .omega_nodes
            .iter()
            .zip(&ux)
            .map(|(&node, s)| h * s * y[np + self.flow.psi_index[node].expect("Omega nodes carry psi")])
            .sum()
    }

    /// `max |d_z phi - (v + U u_x)|` on `Omega`, with a one-sided
    /// second-order `d_z`.
    pub fn coupling_trace_defect(&self, y: &[f64]) -> f64 {
        let g = self.grid();
        let hz = g.hz();
        let ux = central_slope(&self.plate.grid, self.u_part(y));
        let v = self.v_part(y);
        g.omega_columns()
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let dz = (-3.0 * y[g.node(i, 0)] + 4.0 * y[g.node(i, 1)] - y[g.node(i, 2)]) / (2.0 * hz);
                (dz - v[k] - self.speed() * ux[k]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `I + s J` for the chosen generator.
    fn shifted(&self, s: f64, with_p: bool) -> Triplets {
        let mut m = Triplets::new(self.dim(), self.dim());
        for d in 0..self.dim() {
            m.add(d, d, 1.0);
        }
        m.add_block(0, 0, &self.j_a, s);
        if with_p {
            m.add_block(0, 0, &self.j_p, s);
        }
        m
    }
}

/// Causality and step-size checks shared by the integrators.
pub fn check_run(grid: &HalfPlaneGrid, u: f64, t_end: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(Error::InvalidInput("need dt > 0 and T >= 0".into()));
    }
    let limit = grid.hx().min(grid.hz());
    if dt > limit {
        return Err(Error::Stability(format!("dt = {dt} exceeds the grid bound min(h_x, h_z) = {limit}")));
    }
    let horizon = (grid.half_length - 1.0) / (1.0 + u);
    if t_end >= horizon {
        return Err(Error::Stability(format!(
            "T = {t_end} reaches the truncation boundary; need T < (L_x - 1)/(1 + U) = {horizon:.4}"
        )));
    }
    Ok(())
}

/// Implicit-midpoint stepper with a fixed-point loop for the plate force.
struct Stepper<'a> {
    sys: &'a SystemOperator,
    dt: f64,
    minus: Factorization,
    plus: Csr,
    nonlinearity: Option<&'a Nonlinearity>,
}

impl<'a> Stepper<'a> {
    fn new(sys: &'a SystemOperator, dt: f64, with_p: bool, nonlinearity: Option<&'a Nonlinearity>) -> Result<Self> {
        if let Some(n) = nonlinearity {
            n.validate(&sys.plate)?;
        }
        Ok(Self {
            sys,
            dt,
            minus: sys.shifted(-0.5 * dt, with_p).factor()?,
            plus: sys.shifted(0.5 * dt, with_p).to_csr(),
            nonlinearity,
        })
    }

    /// One step; `extra` is added to the right-hand side. Returns the new
    /// state and the fixed-point iteration count.
    fn step(&self, y: &[f64], extra: Option<&[f64]>) -> Result<(Vec<f64>, usize)> {
        let mut rhs = self.plus.apply(y);
        if let Some(e) = extra {
            rhs.iter_mut().zip(e).for_each(|(r, x)| *r += x);
        }
        let Some(kind) = self.nonlinearity else {
            return Ok((self.minus.solve(&rhs)?, 0));
        };
        let sys = self.sys;
        let off_v = sys.off_v();
        let u0 = sys.u_part(y).to_vec();
        let mut guess = u0.clone();
        let mut last = Vec::new();
        for it in 1..=tolerances::NONLINEAR_MAX_ITERS {
            let mid: Vec<f64> = u0.iter().zip(&guess).map(|(a, b)| 0.5 * (a + b)).collect();
            let f = plate_force(&sys.plate, &mid, kind)?;
            let mut r = rhs.clone();
            for (k, fk) in f.iter().enumerate() {
                r[off_v + k] -= self.dt * fk;
            }
            let next = self.minus.solve(&r)?;
            let un = sys.u_part(&next);
            let change = un.iter().zip(&guess).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = un.iter().map(|v| v.abs()).fold(1.0, f64::max);
            guess = un.to_vec();
            last = next;
            if change <= tolerances::NONLINEAR_TOL * scale {
                return Ok((last, it));
            }
        }
        let _ = last;
        Err(Error::NoConvergence { what: "nonlinear midpoint iteration".into(), residual: f64::NAN })
    }
}

fn potential(sys: &SystemOperator, y: &[f64], kind: Option<&Nonlinearity>) -> Result<f64> {
    match kind {
        Some(k) => plate_potential(&sys.plate, sys.u_part(y), k),
        None => Ok(0.0),
    }
}

/// Builds the report for `y` given the previous report and the trace
/// pairings at the two ends of the step.
pub fn energy_report(
    sys: &SystemOperator,
    y: &[f64],
    time: f64,
    potential_value: f64,
    boundary_work: f64,
    initial: Option<&EnergyReport>,
) -> EnergyReport {
    let (e_pl, e_fl) = sys.energies(y);
    let e_total = e_pl + e_fl;
    let base = initial.map(|r| r.e_total + r.potential).unwrap_or(e_total + potential_value);
    EnergyReport {
        time,
        e_pl,
        e_fl,
        e_total,
        boundary_work,
        potential: potential_value,
        residual: e_total + potential_value + boundary_work - base,
    }
}

/// Outcome of a monolithic run.
#[derive(Debug, Clone)]
pub struct Run {
    pub reports: Vec<EnergyReport>,
    pub final_state: CoupledState,
    /// Largest `|psi|` on the pinned nodes over all steps.
    pub kutta_max: f64,
    /// Largest coupling-trace defect over all steps.
    pub trace_defect_max: f64,
    pub max_iterations: usize,
    pub warnings: Vec<String>,
}

/// Implicit-midpoint run of the full system from `y0` to `t_end`.
pub fn evolve(
    sys: &SystemOperator,
    y0: &CoupledState,
    t_end: f64,
    dt: f64,
    nonlinearity: Option<&Nonlinearity>,
) -> Result<Run> {
    evolve_with(sys, y0, t_end, dt, nonlinearity, |_, _| {})
}

/// [`evolve`] with a callback receiving each packed state and its time.
pub fn evolve_with(
    sys: &SystemOperator,
    y0: &CoupledState,
    t_end: f64,
    dt: f64,
    nonlinearity: Option<&Nonlinearity>,
    mut visit: impl FnMut(f64, &[f64]),
) -> Result<Run> {
    check_run(&sys.grid(), sys.speed(), t_end, dt)?;
    let mut warnings = Vec::new();
    if let Some(k) = nonlinearity {
        warnings.extend(k.growth_warnings(sys.plate.smallest_eigenvalue()?));
    }
    let stepper = Stepper::new(sys, dt, true, nonlinearity)?;
    let steps = (t_end / dt).round() as usize;
    let mut y = sys.pack(y0)?;
    let u = sys.speed();
    let first = energy_report(sys, &y, y0.time, potential(sys, &y, nonlinearity)?, 0.0, None);
    let mut reports = vec![first];
    let mut work = 0.0;
    let mut pairing = sys.trace_pairing(&y);
    let mut trace_defect_max = sys.coupling_trace_defect(&y);
    let mut max_iterations = 0;
    let mut kutta_max = y0.flow.kutta_defect();
    visit(y0.time, &y);
    for n in 1..=steps {
        let (next, its) = stepper.step(&y, None)?;
        max_iterations = max_iterations.max(its);
        y = next;
        let p = sys.trace_pairing(&y);
        work += 0.5 * dt * u * (pairing + p);
        pairing = p;
        let t = y0.time + n as f64 * dt;
        reports.push(energy_report(sys, &y, t, potential(sys, &y, nonlinearity)?, work, Some(&first)));
        trace_defect_max = trace_defect_max.max(sys.coupling_trace_defect(&y));
        kutta_max = kutta_max.max(sys.unpack(&y, t).flow.kutta_defect());
        visit(t, &y);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Stability(format!("non-finite state at t = {t}")));
        }
    }
    let final_state = sys.unpack(&y, y0.time + steps as f64 * dt);
    Ok(Run { reports, final_state, kutta_max, trace_defect_max, max_iterations, warnings })
}

/// Fixed-point iterations on one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub start: f64,
    pub length: f64,
    pub iterations: usize,
    /// `d_k / d_{k-1}` with `d_k` the largest `||Delta(u^{k+1} - u^k)||` over
    /// the window.
    pub ratios: Vec<f64>,
    pub halvings: usize,
}

#[derive(Debug, Clone)]
pub struct PicardRun {
    pub windows: Vec<WindowReport>,
    /// Packed states at every step.
    pub trajectory: Vec<Vec<f64>>,
    pub final_state: CoupledState,
}

/// Variation-of-parameters iteration: on each window the inner propagator
/// (generator `J_A`) is driven by `J_P` applied to the previous iterate,
/// until successive trajectories differ by less than `tol` (relative,
/// energy norm). Windows halve automatically when an iteration fails to
/// contract.
pub fn picard_evolve(
    sys: &SystemOperator,
    y0: &CoupledState,
    t_end: f64,
    dt: f64,
    window: f64,
    tol: f64,
    nonlinearity: Option<&Nonlinearity>,
) -> Result<PicardRun> {
    check_run(&sys.grid(), sys.speed(), t_end, dt)?;
    let stepper = Stepper::new(sys, dt, false, nonlinearity)?;
    let jp = sys.j_p.to_csr();
    let total_steps = (t_end / dt).round() as usize;
    let mut start = sys.pack(y0)?;
    let mut trajectory = vec![start.clone()];
    let mut windows = Vec::new();
    let mut done = 0usize;
    let base_steps = ((window / dt).round() as usize).max(1);
    while done < total_steps {
        let mut steps = base_steps.min(total_steps - done);
        let mut halvings = 0;
        loop {
            match picard_window(sys, &stepper, &jp, &start, steps, dt, tol)? {
                Some((traj, iterations, ratios)) => {
                    windows.push(WindowReport {
                        start: y0.time + done as f64 * dt,
                        length: steps as f64 * dt,
                        iterations,
                        ratios,
                        halvings,
                    });
                    start = traj.last().expect("window has states").clone();
                    trajectory.extend(traj.into_iter().skip(1));
                    done += steps;
                    break;
                }
                None if steps > 1 => {
                    steps /= 2;
                    halvings += 1;
                }
                None => {
                    return Err(Error::NoConvergence { what: "Picard window of one step".into(), residual: f64::NAN })
                }
            }
        }
    }
    let final_state = sys.unpack(trajectory.last().expect("non-empty"), y0.time + done as f64 * dt);
    Ok(PicardRun { windows, trajectory, final_state })
}

type WindowOutcome = Option<(Vec<Vec<f64>>, usize, Vec<f64>)>;

fn picard_window(
    sys: &SystemOperator,
    stepper: &Stepper,
    jp: &Csr,
    start: &[f64],
    steps: usize,
    dt: f64,
    tol: f64,
) -> Result<WindowOutcome> {
    // initial iterate: the start state held constant
    let mut prev: Vec<Vec<f64>> = vec![start.to_vec(); steps + 1];
    let mut last_diff: Option<f64> = None;
    let mut ratios = Vec::new();
    for it in 1..=200 {
        let mut traj = Vec::with_capacity(steps + 1);
        traj.push(start.to_vec());
        for n in 0..steps {
            let mid: Vec<f64> = prev[n].iter().zip(&prev[n + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
            let forcing: Vec<f64> = jp.apply(&mid).into_iter().map(|v| dt * v).collect();
            let (next, _) = stepper.step(&traj[n], Some(&forcing))?;
            traj.push(next);
        }
        let diff = traj
            .iter()
            .zip(&prev)
            .map(|(a, b)| {
                let d: Vec<f64> = sys.u_part(a).iter().zip(sys.u_part(b)).map(|(p, q)| p - q).collect();
                sys.plate.laplacian_norm_sq(&d).sqrt()
            })
            .fold(0.0, f64::max);
        let ydiff = traj
            .iter()
            .zip(&prev)
            .map(|(a, b)| {
                let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
                sys.y_norm(&d)
            })
            .fold(0.0, f64::max);
        let scale = traj.iter().map(|y| sys.y_norm(y)).fold(0.0, f64::max);
        if let Some(d) = last_diff {
            if d > 0.0 {
                let r = diff / d;
                ratios.push(r);
                if r >= 1.0 && diff > tol * scale {
                    return Ok(None);
                }
            }
        }
        last_diff = Some(diff);
        prev = traj;
        if ydiff <= tol * scale.max(f64::MIN_POSITIVE) {
            return Ok(Some((prev, it, ratios)));
        }
    }
    Ok(None)
}

/// Seeded smooth state: Gaussian flow bumps (with `psi` vanishing on the
/// pinned part of `z = 0`), a clamped polynomial plate profile, and
/// `d_z phi = v` on `Omega` at `z = 0`.
pub fn random_smooth_state(sys: &SystemOperator, seed: u64) -> CoupledState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let a = coef(3);
    let b = coef(3);
    let centers = coef(3);
    let pu = coef(3);
    let pv = coef(3);
    let grid = sys.grid();
    let velocity = |x: f64| -> f64 {
        if x.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - x * x).powi(2) * (pv[0] + pv[1] * x + pv[2] * x * x)
        }
    };
    let flow = FlowField::from_fn(
        grid,
        |x, z| {
            velocity(x) * z * (-z * z).exp()
                + (0..3).map(|k| a[k] * (-((x - centers[k]).powi(2) + z * z)).exp()).sum::<f64>()
        },
        |x, z| {
            b[0] * bump(x, 0.0, 1.0) * (-z * z).exp()
                + (1..3).map(|k| b[k] * z * (-((x - centers[k]).powi(2) + (z - 1.0).powi(2))).exp()).sum::<f64>()
        },
    );
    let pg = sys.plate.grid;
    let profile = |c: &[f64]| pg.sample(|x, _| (1.0 - x * x).powi(2) * (c[0] + c[1] * x + c[2] * x * x));
    let plate = PlateState { grid: pg, u: profile(&pu), v: profile(&pv) };
    CoupledState { flow, plate, u: sys.speed(), time: 0.0 }
}

/// Scales a state to unit energy norm; zero states stay zero.
pub fn normalized(sys: &SystemOperator, s: &CoupledState) -> Result<CoupledState> {
    let y = sys.pack(s)?;
    let n = sys.y_norm(&y);
    if n == 0.0 {
        return Ok(s.clone());
    }
    let scaled: Vec<f64> = y.iter().map(|v| v / n).collect();
    Ok(sys.unpack(&scaled, s.time))
}

/// Largest `int_0^T ||U d_x gamma[psi]||^2_{H^{-2}} dt / ||x||^2` over seeded
/// smooth samples propagated by the `J_A` dynamics.
pub fn admissibility_constant(sys: &SystemOperator, t_end: f64, dt: f64, samples: usize, seed: u64) -> Result<f64> {
    if samples < 10 {
        return Err(Error::InvalidInput(format!("need at least 10 samples, got {samples}")));
    }
    check_run(&sys.grid(), sys.speed(), t_end, dt)?;
    let u = sys.speed();
    if u == 0.0 {
        return Ok(0.0);
    }
    let stepper = Stepper::new(sys, dt, false, None)?;
    let h = sys.grid().hx();
    let cell = sys.plate.cell();
    let np = sys.flow.n_phi();
    let dual_norm_sq = |y: &[f64]| -> Result<f64> {
        let psi: Vec<f64> = sys
            .flow
            .omega_nodes
            .iter()
            .map(|&node| y[np + sys.flow.psi_index[node].expect("Omega nodes carry psi")])
            .collect();
        // b = U h D^T psi, D the clamped central difference
        let n = psi.len();
        let b: Vec<f64> = (0..n)
            .map(|k| {
                let left = if k > 0 { psi[k - 1] } else { 0.0 };
                let right = if k + 1 < n { psi[k + 1] } else { 0.0 };
                u * h * (left - right) / (2.0 * h)
            })
            .collect();
        let scaled: Vec<f64> = b.iter().map(|v| v / cell).collect();
        let w = sys.plate.biharmonic_solve(&scaled)?;
        Ok(dot(&b, &w))
    };
    let steps = (t_end / dt).round() as usize;
    let mut ys = Vec::new();
    let mut norms = Vec::new();
    for s in 0..samples {
        let x = normalized(sys, &random_smooth_state(sys, seed.wrapping_add(s as u64)))?;
        let y = sys.pack(&x)?;
        let n = sys.y_norm(&y).powi(2);
        if n > 0.0 {
            ys.push(y);
            norms.push(n);
        }
    }
    let mut prev = ys.iter().map(|y| dual_norm_sq(y)).collect::<Result<Vec<_>>>()?;
    let mut integral = vec![0.0; ys.len()];
    for _ in 0..steps {
        let rhs: Vec<Vec<f64>> = ys.iter().map(|y| stepper.plus.apply(y)).collect();
        ys = stepper.minus.solve_many(&rhs)?;
        for (k, y) in ys.iter().enumerate() {
            let cur = dual_norm_sq(y)?;
            integral[k] += 0.5 * dt * (prev[k] + cur);
            prev[k] = cur;
        }
    }
    let worst = integral.iter().zip(&norms).map(|(i, n)| i / n).fold(0.0, f64::max);
    Ok(worst)
}

/// Solution of `(A + lambda) y = rhs` with the a-priori constant
/// `lambda ||y||^2 / ||rhs||^2`.
#[derive(Debug, Clone)]
pub struct ResolventSolution {
    pub y: CoupledState,
    pub constant: f64,
    /// `||(A + lambda) y - rhs|| / ||rhs||` (Euclidean, packed).
    pub residual: f64,
    /// True when `constant > 1/lambda`, i.e. the estimate failed.
    pub estimate_violated: bool,
}

pub fn resolvent_solve(sys: &SystemOperator, lambda: f64, rhs: &CoupledState) -> Result<ResolventSolution> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    let b = sys.pack(rhs)?;
    let mut m = Triplets::new(sys.dim(), sys.dim());
    m.add_block(0, 0, &sys.j_a, 1.0);
    for d in 0..sys.dim() {
        m.add(d, d, lambda);
    }
    let y = m.factor()?.solve(&b)?;
    let r = m.to_csr().apply(&y);
    let bn = dot(&b, &b).sqrt();
    let rn = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let rhs_norm = sys.y_norm(&b);
    let constant = if rhs_norm == 0.0 { 0.0 } else { lambda * sys.y_norm(&y).powi(2) / rhs_norm.powi(2) };
    Ok(ResolventSolution {
        y: sys.unpack(&y, rhs.time),
        constant,
        residual: if bn == 0.0 { rn } else { rn / bn },
        estimate_violated: constant > (1.0 + 1e-8) / lambda,
    })
}

/// Default initial data: `u = amplitude (1 - x^2)^2`, everything else zero.
pub fn plate_bump_state(sys: &SystemOperator, amplitude: f64) -> CoupledState {
    let pg = sys.plate.grid;
    CoupledState {
        flow: FlowField::zeros(sys.grid()),
        plate: PlateState { grid: pg, u: pg.sample(|x, _| amplitude * (1.0 - x * x).powi(2)), v: vec![0.0; pg.dim()] },
        u: sys.speed(),
        time: 0.0,
    }
}

/// Per-step CSV: `t,E_pl,E_fl,E_total,potential,boundary_work,residual`.
pub fn write_energy_csv<W: Write>(reports: &[EnergyReport], mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,E_pl,E_fl,E_total,potential,boundary_work,residual")?;
    for r in reports {
        writeln!(
            w,
            "{:.6},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.time, r.e_pl, r.e_fl, r.e_total, r.potential, r.boundary_work, r.residual
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemOperator {
        SystemOperator::new(HalfPlaneGrid::uniform(4.0, 2.0, 0.25).unwrap(), 0.5).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let sys = small();
        let y0 = plate_bump_state(&sys, 0.0);
        let run = evolve(&sys, &y0, 0.1, 0.01, None).unwrap();
        assert!(run.reports.iter().all(|r| r.e_total == 0.0 && r.residual == 0.0));
        assert_eq!(run.kutta_max, 0.0);
    }

    #[test]
    fn generator_is_skew_in_energy_product() {
        let sys = small();
        let y = sys.pack(&random_smooth_state(&sys, 3)).unwrap();
        let ja = sys.j_a.to_csr().apply(&y);
        let (nf, np) = (sys.flow.n_flow(), sys.plate.dim());
        let mut g = sys.flow.gram_apply(&y[..nf]);
        g.extend(sys.plate.stiffness_apply(sys.u_part(&y)));
        g.extend(sys.v_part(&y).iter().map(|v| v * sys.plate.cell()));
        assert_eq!(g.len(), nf + 2 * np);
        let s = dot(&g, &ja);
        assert!(s.abs() < 1e-10 * sys.y_norm(&y).powi(2), "{s}");
    }

    #[test]
    fn energy_report_definitions() {
        let sys = small();
        let y0 = plate_bump_state(&sys, 1.0);
        let y = sys.pack(&y0).unwrap();
        let r = energy_report(&sys, &y, 0.0, 0.0, 0.0, None);
        assert_eq!(r.e_fl, 0.0);
        let u = sys.u_part(&y);
        assert!((r.e_pl - 0.5 * sys.plate.laplacian_norm_sq(u)).abs() < 1e-12 * r.e_pl);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn run_checks() {
        let sys = small();
        let y0 = plate_bump_state(&sys, 1.0);
        assert!(matches!(evolve(&sys, &y0, 0.1, 0.5, None), Err(Error::Stability(_))));
        assert!(matches!(evolve(&sys, &y0, 2.5, 0.01, None), Err(Error::Stability(_))));
    }

    #[test]
    fn resolvent_zero_and_bound() {
        let sys = small();
        let zero = plate_bump_state(&sys, 0.0);
        let s = resolvent_solve(&sys, 10.0, &zero).unwrap();
        assert_eq!(s.constant, 0.0);
        let rhs = random_smooth_state(&sys, 5);
        let s = resolvent_solve(&sys, 10.0, &rhs).unwrap();
        assert!(s.residual < 1e-10);
        assert!(!s.estimate_violated);
    }
}
