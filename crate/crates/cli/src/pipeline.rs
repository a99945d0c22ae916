//! Command pipelines: each writes its artifacts, collects checks, and the
//! run finishes with a manifest and a PASS/FAIL summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kjplate::coupled::{evolve, normalized, plate_bump_state, random_smooth_state, resolvent_solve, write_energy_csv, SystemOperator};
use kjplate::flowmap::{check_duality_identity, HalfPlaneGrid, NeumannFlowMap};
use kjplate::hilbert::{
    cheb_t, fht_forward, fht_pseudoinverse, fht_tricomi_inverse, pair_table, range_defect, ChebFunction, WeightClass,
};
use kjplate::plate::{
    biharmonic_lambda1, plate_potential, potential_bound_scan, potential_gradient_check, Nonlinearity, PlateGrid,
    PlateOperator,
};
use kjplate::possio::{
    assemble_possio_operator, extend_to_line, solve_possio_with, LineGrid, PossioBasis, PossioProblem, SolvePath,
    TraceDiagnostic,
};
use kjplate::symbols::{abs_m, eval_m, eval_s, verify_multiplier_bounds, Axis, BoundGrid, SymbolPoint};
use kjplate::tolerances as tol;
use kjplate::verify::{self, duality_field};

use crate::config::{Command, ExperimentConfig};

type AnyResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

/// One thresholded check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    /// Extra manifest entries produced by the pipeline.
    pub notes: Vec<(String, String)>,
    pub error: Option<String>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail))
            .collect();
        if let Some(e) = &self.error {
            out.push(format!("error: {e}"));
        }
        out.push(format!("overall: {}", if self.passed() { "PASS" } else { "FAIL" }));
        out
    }
}

struct Ctx<'a> {
    dir: &'a Path,
    report: RunReport,
}

impl Ctx<'_> {
    fn create(&mut self, name: &str) -> AnyResult<BufWriter<File>> {
        self.report.artifacts.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.report.checks.push(Check { name: name.to_string(), passed, detail });
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.report.notes.push((key.to_string(), value.to_string()));
    }
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

/// Runs the configured pipeline and writes `manifest.txt` and `summary.txt`
/// into the output directory.
pub fn run_and_report(cfg: &ExperimentConfig) -> RunReport {
    let dir = cfg.output_dir.clone();
    if let Err(e) = fs::create_dir_all(&dir) {
        return RunReport { error: Some(format!("cannot create {}: {e}", dir.display())), ..Default::default() };
    }
    let mut ctx = Ctx { dir: &dir, report: RunReport::default() };
    let outcome = match cfg.command {
        Command::Hilbert => hilbert(cfg, &mut ctx),
        Command::Symbols => symbols(cfg, &mut ctx),
        Command::Possio => possio(cfg, &mut ctx),
        Command::Flowmap => flowmap(cfg, &mut ctx),
        Command::Plate => plate(cfg, &mut ctx),
        Command::Simulate => simulate(cfg, &mut ctx),
        Command::VerifyAll => verify_all(cfg, &mut ctx),
    };
    let mut report = ctx.report;
    if let Err(e) = outcome {
        report.error = Some(format!("{} pipeline: {e}", cfg.command));
    }
    if let Err(e) = write_manifest(&dir, cfg, &report) {
        report.error.get_or_insert(format!("manifest: {e}"));
    }
    report
}

fn write_manifest(dir: &Path, cfg: &ExperimentConfig, report: &RunReport) -> std::io::Result<()> {
    let mut m = BufWriter::new(File::create(dir.join("manifest.txt"))?);
    for line in cfg.manifest_lines() {
        writeln!(m, "{line}")?;
    }
    for (k, v) in &report.notes {
        writeln!(m, "{k}={v}")?;
    }
    writeln!(m, "artifacts={}", report.artifacts.join(","))?;
    match &report.error {
        None => writeln!(m, "status=complete")?,
        Some(e) => {
            writeln!(m, "status=error")?;
            writeln!(m, "partial_artifacts=true")?;
            writeln!(m, "error={}", e.replace('\n', " "))?;
        }
    }
    writeln!(m, "verdict={}", if report.passed() { "PASS" } else { "FAIL" })?;
    m.flush()?;
    let mut s = BufWriter::new(File::create(dir.join("summary.txt"))?);
    for line in report.summary_lines() {
        writeln!(s, "{line}")?;
    }
    s.flush()
}

fn hilbert(cfg: &ExperimentConfig, ctx: &mut Ctx) -> AnyResult<()> {
    let n = cfg.int("n") as usize;
    let p = cfg.real("p");
    let rows = pair_table(n)?;
    let mut w = ctx.create("pairs.csv")?;
    writeln!(w, "label,max_error")?;
    for r in &rows {
        writeln!(w, "\"{}\",{:.6e}", r.label, r.max_error)?;
    }
    w.flush()?;
    let null = rows.last().map(|r| r.max_error).unwrap_or(0.0);
    let pair_max = rows[..rows.len() - 1].iter().map(|r| r.max_error).fold(0.0, f64::max);
    ctx.check("transform pairs", pair_max < tol::HILBERT_PAIR, format!("max error {}", sci(pair_max)));
    ctx.check("null image", null < tol::HILBERT_NULL, format!("|T[1/sqrt(1-x^2)]| {}", sci(null)));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = ctx.create("roundtrip.csv")?;
    writeln!(w, "sample,round_trip_error,range_defect")?;
    let (mut trip, mut defect) = (0.0f64, 0.0f64);
    for s in 0..10 {
        let a: Vec<Complex64> =
            (0..6).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let f = ChebFunction::from_complex_fn(n, WeightClass::Sqrt, |x| {
            a.iter().enumerate().map(|(j, c)| c * cheb_t(j, x)).sum()
        })?;
        let g = fht_forward(&f)?;
        let back = fht_tricomi_inverse(&g, f.integral() / std::f64::consts::PI)?;
        let scale = f.max_abs().max(1.0);
        let e = back.point_values().iter().zip(f.point_values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            / scale;
        let d = range_defect(&g).norm() / scale;
        writeln!(w, "{s},{e:.6e},{d:.6e}")?;
        trip = trip.max(e);
        defect = defect.max(d);
    }
    w.flush()?;
    ctx.check("tricomi round trip", trip < tol::TRICOMI_ROUND_TRIP, format!("max error {}", sci(trip)));
    ctx.check("range defect", defect < tol::RANGE_DEFECT, format!("max {}", sci(defect)));

    let g = ChebFunction::from_fn(n, WeightClass::Smooth, |x| x * x * x)?;
    let pinv = fht_pseudoinverse(&g, p)?;
    pinv.f.write_csv(ctx.create("pseudoinverse.csv")?)?;
    ctx.note("pseudoinverse_null_coefficient", format!("{:.12e}", pinv.null_coefficient.re));
    ctx.check(
        "pseudoinverse residual",
        pinv.residual < tol::PSEUDOINVERSE_RESIDUAL,
        format!("residual {}", sci(pinv.residual)),
    );
    let one = fht_forward(&ChebFunction::from_fn(n, WeightClass::Smooth, |_| 1.0)?)?;
    let mut w = ctx.create("transform.dat")?;
    writeln!(w, "# x  T[1](x)")?;
    for (x, v) in one.nodes().iter().zip(one.point_values()) {
        writeln!(w, "{x:.12e} {:.12e}", v.re)?;
    }
    w.flush()?;
    Ok(())
}

fn symbols(cfg: &ExperimentConfig, ctx: &mut Ctx) -> AnyResult<()> {
    let grid = BoundGrid {
        alpha: Axis::new(cfg.real("alpha_min"), cfg.real("alpha_max"), cfg.int("alpha_n") as usize),
        eta: Axis::new(-cfg.real("eta_max"), cfg.real("eta_max"), cfg.int("eta_n") as usize),
        z_u: Axis::new(-cfg.real("zu_max"), cfg.real("zu_max"), cfg.int("zu_n") as usize),
    };
    if grid.alpha.lo > grid.alpha.hi {
        return Err("alpha_min exceeds alpha_max".into());
    }
    let exponent = cfg.real("exponent");
    let report = verify_multiplier_bounds(&grid, exponent, true);
    let full = grid.len() <= 200_000;
    let mut w = ctx.create("bounds.csv")?;
    let mut kept = report.clone();
    if !full {
        kept.rows.retain(|r| r.margin < 0.0);
    }
    kept.write_csv(&mut w)?;
    w.flush()?;
    ctx.note("bounds_rows", if full { "all" } else { "violations_only" });
    ctx.note("points", report.points);
    ctx.note("points_by_case", format!("{:?}", report.points_by_case));
    ctx.note("violations_by_case", format!("{:?}", report.violations_by_case));
    ctx.note("worst_margin", format!("{:?}", report.worst_margin));
    ctx.check(
        "case bounds",
        report.violations == 0,
        format!(
            "{} violations (A/B/C {}/{}/{}) with exponent {exponent}",
            report.violations, report.violations_by_case[0], report.violations_by_case[1], report.violations_by_case[2]
        ),
    );
    ctx.check(
        "factorization",
        report.factorization_max < tol::FACTORIZATION,
        format!("max |jS - m| {}", sci(report.factorization_max)),
    );
    let (alpha, beta, u) = (cfg.real("alpha"), cfg.real("beta"), cfg.real("U"));
    let mut w = ctx.create("symbol_profile.dat")?;
    writeln!(w, "# eta |m| |S| |M|   alpha={alpha} beta={beta} U={u}")?;
    for k in 0..=200 {
        let eta = -50.0 + 0.5 * k as f64;
        let p = SymbolPoint::one_d(alpha, beta, eta, u)?;
        let s = eval_s(&p).map(|s| s.norm()).unwrap_or(f64::NAN);
        writeln!(w, "{eta:.6e} {:.12e} {s:.12e} {:.12e}", eval_m(&p).norm(), abs_m(alpha, p.z_u(), eta))?;
    }
    w.flush()?;
    Ok(())
}

fn possio(cfg: &ExperimentConfig, ctx: &mut Ctx) -> AnyResult<()> {
    let n = cfg.int("n") as usize;
    let line = LineGrid::new(cfg.real("half_length"), cfg.int("points") as usize)?;
    let basis = PossioBasis::new(n, line)?;
    let (alpha, u) = (cfg.real("alpha"), cfg.real("U"));
    let path = if cfg.word("path") == "direct" { SolvePath::Direct } else { SolvePath::Decomposed };
    let profile = ChebFunction::from_fn(n, WeightClass::Sqrt, |x| (1.0 - (x / 0.9).powi(2)).max(0.0).powi(8))?;
    let mut w = ctx.create("possio.csv")?;
    writeln!(w, "alpha,beta,U,residual,trace_norm")?;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (k, &beta) in cfg.reals("betas").iter().enumerate() {
        let d = match cfg.word("downwash") {
            "heave" => ChebFunction::from_fn(n, WeightClass::Smooth, |_| 1.0)?,
            _ => assemble_possio_operator(&basis, alpha, beta, u)?.apply(&profile)?,
        };
        let problem = PossioProblem::new(d, alpha, beta, u, line)?;
        match solve_possio_with(&basis, &problem, path) {
            Ok(s) => {
                let trace = TraceDiagnostic::measure(&line, &extend_to_line(&s.psi_hat, &line), tol::SOBOLEV_EPSILON)?;
                writeln!(w, "{alpha},{beta},{u},{:.6e},{:.12e}", s.residual, trace.norm_value)?;
                worst = worst.max(s.residual);
                for warning in &s.warnings {
                    ctx.note(&format!("warning_beta_{beta}"), warning);
                }
                ctx.note(&format!("path_beta_{beta}"), format!("{} ({} iterations)", s.path.label(), s.iterations));
                let mut pw = ctx.create(&format!("profile_{k}.dat"))?;
                writeln!(pw, "# x |psi(x)|   beta={beta}")?;
                for (x, v) in s.psi_hat.nodes().iter().zip(s.psi_hat.point_values()) {
                    writeln!(pw, "{x:.12e} {:.12e}", v.norm())?;
                }
                pw.flush()?;
            }
            Err(e) => failures.push(format!("beta={beta}: {e}")),
        }
    }
    w.flush()?;
    let detail = if failures.is_empty() { format!("max residual {}", sci(worst)) } else { failures.join("; ") };
    ctx.check("possio residual", failures.is_empty() && worst < tol::POSSIO_RESIDUAL, detail);
    Ok(())
}

fn flowmap(cfg: &ExperimentConfig, ctx: &mut Ctx) -> AnyResult<()> {
    let (l, depth, u) = (cfg.real("half_length"), cfg.real("depth"), cfg.real("U"));
    let mut h = cfg.real("h");
    let mut w = ctx.create("duality.csv")?;
    writeln!(w, "h,pairing,trace_mismatch,neumann_residual")?;
    let mut pairings = Vec::new();
    let mut neumann_worst = 0.0f64;
    for level in 0..cfg.int("levels") {
        let grid = HalfPlaneGrid::uniform(l, depth, h)?;
        let map = NeumannFlowMap::new(grid, u)?;
        let g: Vec<f64> = grid.omega_columns().iter().map(|&i| 1.0 + grid.x(i)).collect();
        let (field, residual) = map.apply(&g)?;
        if level == 0 {
            field.write_snapshot(ctx.create("neumann_snapshot.bin")?)?;
            field.write_surface_csv(ctx.create("neumann_surface.csv")?)?;
        }
        let d = check_duality_identity(&map, &duality_field(grid), &g)?;
        writeln!(w, "{h},{:.6e},{:.6e},{:.6e}", d.pairing, d.trace_mismatch, residual)?;
        pairings.push(d.pairing);
        neumann_worst = neumann_worst.max(residual);
        h /= 2.0;
    }
    w.flush()?;
    let ratios: Vec<f64> = pairings.windows(2).map(|p| p[0] / p[1]).collect();
    ctx.check("neumann solve", neumann_worst < 1e-8, format!("max residual {}", sci(neumann_worst)));
    ctx.check(
        "duality decay",
        ratios.iter().all(|r| *r >= tol::DUALITY_DECAY),
        format!("ratios {}", ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(",")),
    );
    let lambda = cfg.real("lambda");
    let mut w = ctx.create("resolvent.csv")?;
    writeln!(w, "h,constant,residual")?;
    let mut consts = Vec::new();
    let mut violated = false;
    for h in [cfg.real("h"), cfg.real("h") / 2.0] {
        let sys = SystemOperator::new(HalfPlaneGrid::uniform(l, depth, h)?, u)?;
        let rhs = normalized(&sys, &random_smooth_state(&sys, cfg.seed))?;
        let s = resolvent_solve(&sys, lambda, &rhs)?;
        writeln!(w, "{h},{:.12e},{:.6e}", s.constant, s.residual)?;
        violated |= s.estimate_violated;
        consts.push(s.constant);
    }
    w.flush()?;
    let spread = consts[0].max(consts[1]) / consts[0].min(consts[1]);
    ctx.check(
        "resolvent estimate",
        !violated && spread <= tol::RESOLVENT_STABILITY,
        format!("constants {}/{} (bound 1/lambda = {})", sci(consts[0]), sci(consts[1]), sci(1.0 / lambda)),
    );
    Ok(())
}

fn nonlinearity(cfg: &ExperimentConfig, two_d: Option<&PlateGrid>) -> Option<Nonlinearity> {
    match cfg.word("nonlinearity") {
        "kirchhoff" => Some(Nonlinearity::Kirchhoff { cubic: cfg.real("cubic"), linear: cfg.real("linear") }),
        "berger" => Some(Nonlinearity::Berger { kappa: cfg.real("kappa"), gamma: cfg.real("gamma") }),
        "vonkarman" => Some(Nonlinearity::VonKarman {
            f0: match two_d {
                Some(g) => g.sample(|x, y| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()),
                None => Vec::new(),
            },
        }),
        _ => None,
    }
}

fn plate(cfg: &ExperimentConfig, ctx: &mut Ctx) -> AnyResult<()> {
    let cells = cfg.int("cells") as usize;
    let grid = if cfg.word("nonlinearity") == "vonkarman" {
        PlateGrid::rectangle(cells.min(64), cells.min(64), 1.0, 1.0)?
    } else {
        PlateGrid::interval(cells)?
    };
    let op = PlateOperator::new(grid)?;
    let kind = nonlinearity(cfg, Some(&grid)).expect("plate command always names a nonlinearity");
    let limit = if matches!(kind, Nonlinearity::VonKarman { .. }) { tol::GRADIENT_VON_KARMAN } else { tol::GRADIENT_LOCAL };
    if !grid.is_2d() {
        let lam = biharmonic_lambda1(&grid)?;
        ctx.note("lambda1_coarse", format!("{:.12e}", lam.coarse));
        ctx.note("lambda1_fine", format!("{:.12e}", lam.fine));
        ctx.note("lambda1_extrapolated", format!("{:.12e}", lam.extrapolated));
        for (k, warning) in kind.growth_warnings(lam.fine).iter().enumerate() {
            ctx.note(&format!("warning_{k}"), warning);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut random = |g: &PlateGrid| -> Vec<f64> {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        g.sample(|x, y| c[0] + c[1] * x + c[2] * (3.0 * y).sin() + c[3] * (2.0 * x).cos() * y)
    };
    let mut w = ctx.create("gradient.csv")?;
    writeln!(w, "sample,potential,relative_error")?;
    let mut worst = 0.0f64;
    for s in 0..cfg.int("samples") {
        let u = random(&grid);
        let h = random(&grid);
        let e = potential_gradient_check(&op, &u, &h, &kind, tol::GRADIENT_STEP)?;
        writeln!(w, "{s},{:.12e},{e:.6e}", plate_potential(&op, &u, &kind)?)?;
        worst = worst.max(e);
    }
    w.flush()?;
    ctx.check("gradient consistency", worst < limit, format!("max relative error {} (limit {})", sci(worst), sci(limit)));
    let direction = random(&grid);
    let (bound, pts) = potential_bound_scan(&op, &direction, &kind, cfg.real("c_max"), 201)?;
    let mut w = ctx.create("scan.dat")?;
    writeln!(w, "# c  delta||Delta(cu)||^2 + Pi(cu) + C_delta   delta={} C_delta={}", bound.delta, bound.c_delta)?;
    for p in &pts {
        writeln!(w, "{:.6e} {:.12e}", p.c, p.value)?;
    }
    w.flush()?;
    let min = pts.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    ctx.check("potential lower bound", min >= -1e-10, format!("scan minimum {}", sci(min)));
    Ok(())
}

fn simulate(cfg: &ExperimentConfig, ctx: &mut Ctx) -> AnyResult<()> {
    let grid = HalfPlaneGrid::uniform(cfg.real("half_length"), cfg.real("depth"), cfg.real("h"))?;
    let u = cfg.real("U");
    let sys = SystemOperator::new(grid, u)?;
    let kind = nonlinearity(cfg, None);
    let y0 = plate_bump_state(&sys, cfg.real("amplitude"));
    let run = evolve(&sys, &y0, cfg.real("T"), cfg.real("dt"), kind.as_ref())?;
    let mut w = ctx.create("energy.csv")?;
    write_energy_csv(&run.reports, &mut w)?;
    w.flush()?;
    run.final_state.flow.write_snapshot(ctx.create("final_snapshot.bin")?)?;
    run.final_state.flow.write_surface_csv(ctx.create("final_surface.csv")?)?;
    let mut w = ctx.create("plate.dat")?;
    writeln!(w, "# x u v   t={}", run.final_state.time)?;
    let xs = sys.plate.grid.nodes();
    for ((x, uu), v) in xs.iter().zip(&run.final_state.plate.u).zip(&run.final_state.plate.v) {
        writeln!(w, "{:.12e} {uu:.12e} {v:.12e}", x.0)?;
    }
    w.flush()?;
    for (k, warning) in run.warnings.iter().enumerate() {
        ctx.note(&format!("warning_{k}"), warning);
    }
    ctx.note("steps", run.reports.len() - 1);
    ctx.note("max_nonlinear_iterations", run.max_iterations);
    ctx.note("coupling_trace_defect_max", format!("{:.6e}", run.trace_defect_max));
    ctx.note("continuation", "stopped at T; no global-in-time claim");
    let first = run.reports[0];
    let scale = (first.e_total + first.potential).abs().max(f64::MIN_POSITIVE);
    let residual = run.reports.iter().map(|r| r.residual.abs()).fold(0.0, f64::max) / scale;
    ctx.note("energy_residual_relative_max", format!("{residual:.6e}"));
    if u == 0.0 {
        ctx.check(
            "energy conservation",
            residual < tol::ENERGY_DRIFT,
            format!("max relative drift {} (limit {})", sci(residual), sci(tol::ENERGY_DRIFT)),
        );
    } else {
        ctx.check("finite energy", residual.is_finite(), format!("max relative energy residual {}", sci(residual)));
    }
    ctx.check("pinned psi", run.kutta_max == 0.0, format!("max |psi| on pinned nodes {}", run.kutta_max));
    Ok(())
}

fn verify_all(cfg: &ExperimentConfig, ctx: &mut Ctx) -> AnyResult<()> {
    let mut w = ctx.create("verify.csv")?;
    writeln!(w, "id,name,status,detail")?;
    for &id in cfg.ints("criteria") {
        let o = verify::run(id as u8, cfg.seed).ok_or("unknown criterion")?;
        println!("{o}");
        writeln!(w, "{},{},{},\"{}\"", o.id, o.name, if o.passed { "PASS" } else { "FAIL" }, o.detail.replace('"', "'"))?;
        ctx.check(&format!("criterion {} {}", o.id, o.name), o.passed, o.detail);
    }
    w.flush()?;
    Ok(())
}
