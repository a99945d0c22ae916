//! Per-frequency Possio equation `d = P_Omega T psi` on `Omega = (-1,1)`.
//!
//! `psi` lives on `Omega` in the sqrt weight class and is extended by zero to
//! a periodic line grid on `[-L, L)`. The flow operator acts as the Fourier
//! multiplier `m(tau, eta)`; restriction to `Omega` is evaluation of the
//! Fourier sum at the Chebyshev nodes.
//!
//! Two solvers are provided: a truncated-SVD least-squares solve of the
//! assembled matrix, and a decomposed solve `d = H_f P_Omega S psi + V S psi`
//! that preconditions GMRES with the finite-Hilbert pseudoinverse and the
//! inverse of the `S` block, leaving the compact part `V` to the iteration.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::hilbert::{self, ChebFunction, WeightClass};
use crate::symbols::{self, SymbolPoint};
use crate::tolerances;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Uniform periodic grid on `[-L, L)` with `m` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGrid {
    pub half_length: f64,
    pub points: usize,
}

impl Default for LineGrid {
    fn default() -> Self {
        Self { half_length: 8.0, points: 4096 }
    }
}

impl LineGrid {
    pub fn new(half_length: f64, points: usize) -> Result<Self> {
        if !(half_length >= 4.0) {
            return Err(Error::InvalidInput(format!("line half-length {half_length} below 4")));
        }
        if !points.is_power_of_two() || points < 16 {
            return Err(Error::InvalidInput(format!("line points {points} not a power of two >= 16")));
        }
        Ok(Self { half_length, points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn x(&self, n: usize) -> f64 {
        -self.half_length + n as f64 * self.spacing()
    }

    /// Dual variable of FFT bin `l`.
    pub fn eta(&self, l: usize) -> f64 {
        let m = self.points as i64;
        let k = if (l as i64) < m / 2 { l as i64 } else { l as i64 - m };
        PI * k as f64 / self.half_length
    }

    pub fn etas(&self) -> Vec<f64> {
        (0..self.points).map(|l| self.eta(l)).collect()
    }

    pub fn d_eta(&self) -> f64 {
        PI / self.half_length
    }

    pub fn refined(&self) -> Self {
        Self { half_length: self.half_length, points: 2 * self.points }
    }
}

/// Continuous Fourier transform `f_hat(eta) = int f(x) e^{-i eta x} dx`
/// approximated on the line grid, in FFT bin order.
pub fn line_transform(line: &LineGrid, samples: &[Complex64]) -> Vec<Complex64> {
    let mut buf = samples.to_vec();
    let fft = FftPlanner::new().plan_fft_forward(line.points);
    fft.process(&mut buf);
    let h = line.spacing();
    let m = line.points as i64;
    for (l, v) in buf.iter_mut().enumerate() {
        let k = if (l as i64) < m / 2 { l as i64 } else { l as i64 - m };
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        *v *= h * sign;
    }
    buf
}

/// `(sum_eta (1+eta^2)^s |f_hat(eta)|^2 d_eta)^(1/2)` of line samples.
pub fn sobolev_trace_norm(line: &LineGrid, samples: &[Complex64], s: f64) -> f64 {
    let fh = line_transform(line, samples);
    let de = line.d_eta();
    fh.iter()
        .enumerate()
        .map(|(l, v)| {
            let e = line.eta(l);
            (1.0 + e * e).powf(s) * v.norm_sqr() * de
        })
        .sum::<f64>()
        .sqrt()
}

/// Sobolev norm with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceDiagnostic {
    pub epsilon: f64,
    pub norm_value: f64,
    /// Retained `|eta|` range.
    pub frequency_band: (f64, f64),
}

impl TraceDiagnostic {
    /// `H^{-1/2-epsilon}` norm of line samples.
    pub fn measure(line: &LineGrid, samples: &[Complex64], epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 0.5) {
            return Err(Error::InvalidInput(format!("epsilon {epsilon} outside (0, 1/2]")));
        }
        Ok(Self {
            epsilon,
            norm_value: sobolev_trace_norm(line, samples, -0.5 - epsilon),
            frequency_band: (0.0, PI * (line.points / 2) as f64 / line.half_length),
        })
    }
}

/// Barycentric weights of the Chebyshev-Gauss nodes.
fn bary_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let s = ((2 * j + 1) as f64 * PI / (2 * n) as f64).sin();
            if j % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Values at `x` of the Lagrange basis on the Chebyshev-Gauss nodes.
fn lagrange_row(nodes: &[f64], w: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut row = vec![0.0; n];
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        row[j] = 1.0;
        return row;
    }
    let mut den = 0.0;
    for j in 0..n {
        let t = w[j] / (x - nodes[j]);
        row[j] = t;
        den += t;
    }
    for r in row.iter_mut() {
        *r /= den;
    }
    row
}

/// Zero extension of a sqrt-class function to the line grid.
pub fn extend_to_line(f: &ChebFunction, line: &LineGrid) -> Vec<Complex64> {
    let nodes = f.nodes();
    let w = bary_weights(f.n());
    let vals = f.values();
    (0..line.points)
        .map(|k| {
            let x = line.x(k);
            if x.abs() >= 1.0 {
                return ZERO;
            }
            let row = lagrange_row(&nodes, &w, x);
            let s: Complex64 = row.iter().zip(vals).map(|(r, v)| v * *r).sum();
            s * f.weight_class().factor(x)
        })
        .collect()
}

/// Grid data shared by all frequencies: transforms of the zero-extended
/// nodal basis `sqrt(1-x^2) l_j(x)` and the node exponentials.
#[derive(Debug, Clone)]
pub struct PossioBasis {
    pub n: usize,
    pub line: LineGrid,
    /// `M x N`, column `j` is the transform of basis function `j`.
    basis_hat: DMatrix<Complex64>,
    /// `N x M`, `e^{i eta_l x_k} / (2L)`.
    synth: DMatrix<Complex64>,
}

impl PossioBasis {
    pub fn new(n: usize, line: LineGrid) -> Result<Self> {
        if n < hilbert::MIN_NODES {
            return Err(Error::TooFewNodes(n));
        }
        let nodes = hilbert::nodes(n);
        let w = bary_weights(n);
        let m = line.points;
        let mut samples = DMatrix::<Complex64>::zeros(m, n);
        for k in 0..m {
            let x = line.x(k);
            if x.abs() >= 1.0 {
                continue;
            }
            let row = lagrange_row(&nodes, &w, x);
            let wt = (1.0 - x * x).sqrt();
            for j in 0..n {
                samples[(k, j)] = Complex64::new(row[j] * wt, 0.0);
            }
        }
        let mut basis_hat = DMatrix::<Complex64>::zeros(m, n);
        for j in 0..n {
            let col: Vec<Complex64> = samples.column(j).iter().copied().collect();
            let fh = line_transform(&line, &col);
            for l in 0..m {
                basis_hat[(l, j)] = fh[l];
            }
        }
        let scale = 1.0 / (2.0 * line.half_length);
        let nyq = m / 2;
        let mut synth = DMatrix::<Complex64>::zeros(n, m);
        for k in 0..n {
            for l in 0..m {
                let e = line.eta(l);
                synth[(k, l)] = Complex64::from_polar(scale, e * nodes[k]);
            }
            // Nyquist bin split evenly between +eta and -eta
            let e = line.eta(nyq).abs();
            synth[(k, nyq)] = Complex64::new(scale * (e * nodes[k]).cos(), 0.0);
        }
        Ok(Self { n, line, basis_hat, synth })
    }

    fn apply_multiplier(&self, mult: &[Complex64]) -> DMatrix<Complex64> {
        let mut scaled = self.basis_hat.clone();
        for (l, &ml) in mult.iter().enumerate() {
            for j in 0..self.n {
                scaled[(l, j)] *= ml;
            }
        }
        &self.synth * scaled
    }
}

/// `P_Omega` of the multiplier applied to a smooth probe bump, evaluated at
/// the `n` Chebyshev nodes from line samples on `line`.
fn probe_image(line: &LineGrid, n: usize, alpha: f64, beta: f64, u: f64) -> Result<Vec<Complex64>> {
    let samples: Vec<Complex64> =
        (0..line.points).map(|k| Complex64::new(bump(line.x(k), 0.0, 0.9), 0.0)).collect();
    let fh = line_transform(line, &samples);
    let mult = multiplier_samples(line, alpha, beta, u, Multiplier::M)?;
    let scale = 1.0 / (2.0 * line.half_length);
    let nyq = line.points / 2;
    Ok(hilbert::nodes(n)
        .iter()
        .map(|&x| {
            (0..line.points)
                .map(|l| {
                    let e = line.eta(l);
                    let phase = if l == nyq {
                        Complex64::new((e * x).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, e * x)
                    };
                    mult[l] * fh[l] * phase
                })
                .sum::<Complex64>()
                * scale
        })
        .collect())
}

/// Relative change of the probe image between `line` and half its points.
pub fn refinement_defect(line: &LineGrid, n: usize, alpha: f64, beta: f64, u: f64) -> Result<f64> {
    let fine = probe_image(line, n, alpha, beta, u)?;
    let coarse_line = LineGrid { half_length: line.half_length, points: line.points / 2 };
    let coarse = probe_image(&coarse_line, n, alpha, beta, u)?;
    let num = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let den = fine.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(if den == 0.0 { num } else { num / den })
}

/// Multiplier samples at the line-grid dual variables. `S` takes `m(tau,0) = -1`
/// at `eta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplier {
    M,
    S,
    J,
}

pub fn multiplier_samples(
    line: &LineGrid,
    alpha: f64,
    beta: f64,
    u: f64,
    kind: Multiplier,
) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(line.points);
    let nyq = line.points / 2;
    for l in 0..line.points {
        let eta = line.eta(l);
        let value = |eta: f64| -> Result<Complex64> {
            let p = SymbolPoint::one_d(alpha, beta, eta, u)?;
            Ok(match kind {
                Multiplier::M => symbols::eval_m(&p),
                Multiplier::S => symbols::eval_s(&p).unwrap_or_else(|| symbols::eval_m(&p)),
                Multiplier::J => symbols::eval_j(eta).unwrap_or(ZERO),
            })
        };
        if l == nyq {
            // paired with the even synthesis row: average of +eta and -eta
            let e = eta.abs();
            out.push(0.5 * (value(e)? + value(-e)?));
        } else {
            out.push(value(eta)?);
        }
    }
    Ok(out)
}

/// Assembled operator on sqrt-class node coefficients.
#[derive(Debug, Clone)]
pub struct PossioOperator {
    pub matrix: DMatrix<Complex64>,
    pub alpha: f64,
    pub beta: f64,
    pub u: f64,
    /// Change of a smooth probe image under line-grid halving; large values
    /// mean the line grid under-resolves the multiplier.
    pub refinement_defect: f64,
    pub aliasing: bool,
}

pub const ALIASING_THRESHOLD: f64 = 1e-6;

/// Column `j` is `P_Omega` of the inverse transform of `m` times the
/// transform of the zero-extended `j`-th nodal basis function.
pub fn assemble_possio_operator(
    basis: &PossioBasis,
    alpha: f64,
    beta: f64,
    u: f64,
) -> Result<PossioOperator> {
    assemble_with(basis, alpha, beta, u, Multiplier::M)
}

pub fn assemble_with(
    basis: &PossioBasis,
    alpha: f64,
    beta: f64,
    u: f64,
    kind: Multiplier,
) -> Result<PossioOperator> {
    let mult = multiplier_samples(&basis.line, alpha, beta, u, kind)?;
    let defect = refinement_defect(&basis.line, basis.n, alpha, beta, u)?;
    Ok(PossioOperator {
        matrix: basis.apply_multiplier(&mult),
        alpha,
        beta,
        u,
        refinement_defect: defect,
        aliasing: defect > ALIASING_THRESHOLD,
    })
}

impl PossioOperator {
    pub fn apply(&self, psi: &ChebFunction) -> Result<ChebFunction> {
        if psi.weight_class() != WeightClass::Sqrt || psi.n() != self.matrix.ncols() {
            return Err(Error::Incompatible("operator expects sqrt-class input of matching N".into()));
        }
        let v = DVector::from_column_slice(psi.values());
        let out = &self.matrix * v;
        ChebFunction::new(out.iter().copied().collect(), WeightClass::Smooth)
    }
}

/// One Possio problem: downwash on `Omega`, frequency and flow speed.
#[derive(Debug, Clone)]
pub struct PossioProblem {
    pub d_hat: ChebFunction,
    pub alpha: f64,
    pub beta: f64,
    pub u: f64,
    pub line: LineGrid,
}

impl PossioProblem {
    pub fn new(d_hat: ChebFunction, alpha: f64, beta: f64, u: f64, line: LineGrid) -> Result<Self> {
        SymbolPoint::one_d(alpha, beta, 0.0, u)?;
        LineGrid::new(line.half_length, line.points)?;
        if d_hat.weight_class() != WeightClass::Smooth {
            return Err(Error::InvalidInput("downwash must be smooth-class samples".into()));
        }
        Ok(Self { d_hat, alpha, beta, u, line })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    Direct,
    Decomposed,
}

impl SolvePath {
    pub fn label(self) -> &'static str {
        match self {
            SolvePath::Direct => "direct",
            SolvePath::Decomposed => "decomposed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PossioSolution {
    /// Sqrt-class samples; zero off `Omega` by construction.
    pub psi_hat: ChebFunction,
    /// `||P_Omega T psi - d|| / ||d||` in the weighted `L_2(Omega)` norm.
    pub residual: f64,
    pub path: SolvePath,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

/// Weighted `L_2(Omega)` norm of node values (Gauss-Chebyshev weights for
/// `int |f|^2 dx`).
pub fn l2_omega(values: &[Complex64]) -> f64 {
    let n = values.len();
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let s = ((2 * k + 1) as f64 * PI / (2 * n) as f64).sin();
            s * v.norm_sqr()
        })
        .sum::<f64>()
        .mul_add(PI / n as f64, 0.0)
        .sqrt()
}

fn relative_residual(a: &DMatrix<Complex64>, x: &DVector<Complex64>, d: &DVector<Complex64>) -> f64 {
    let r = a * x - d;
    let rv: Vec<Complex64> = r.iter().copied().collect();
    let dv: Vec<Complex64> = d.iter().copied().collect();
    let dn = l2_omega(&dv);
    if dn == 0.0 {
        l2_omega(&rv)
    } else {
        l2_omega(&rv) / dn
    }
}

/// Truncated-SVD least-squares solve with cutoff `TSVD_CUTOFF * sigma_max`.
pub fn solve_direct(a: &DMatrix<Complex64>, d: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let svd = a.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Solver("SVD factors unavailable".into())),
    };
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = tolerances::TSVD_CUTOFF * smax;
    let utd = u.adjoint() * d;
    let mut y = DVector::<Complex64>::zeros(a.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cut {
            y[i] = utd[i] / s;
        }
    }
    Ok(vt.adjoint() * y)
}

/// Operators of the decomposed path at one frequency.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub full: DMatrix<Complex64>,
    /// `P_Omega S E_Omega`.
    pub s_block: DMatrix<Complex64>,
    /// Finite Hilbert transform on smooth node samples.
    pub hilbert: DMatrix<Complex64>,
    /// `full - hilbert * s_block`, the discrete compact part.
    pub compact: DMatrix<Complex64>,
}

pub fn decompose(basis: &PossioBasis, alpha: f64, beta: f64, u: f64) -> Result<Decomposition> {
    let full = assemble_possio_operator(basis, alpha, beta, u)?.matrix;
    let s_block = assemble_with(basis, alpha, beta, u, Multiplier::S)?.matrix;
    let n = basis.n;
    let mut hilbert = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let mut e = vec![ZERO; n];
        e[j] = Complex64::new(1.0, 0.0);
        let g = hilbert::fht_forward(&ChebFunction::new(e, WeightClass::Smooth)?)?;
        for (i, v) in g.values().iter().enumerate() {
            hilbert[(i, j)] = *v;
        }
    }
    let compact = &full - &hilbert * &s_block;
    Ok(Decomposition { full, s_block, hilbert, compact })
}

/// Minimum-norm Tricomi inverse on node samples, returned as point values.
fn hilbert_pseudoinverse_values(g: &[Complex64], p: f64) -> Result<Vec<Complex64>> {
    let f = ChebFunction::new(g.to_vec(), WeightClass::Smooth)?;
    let base = hilbert::fht_tricomi_inverse(&f, ZERO)?;
    let c = hilbert::minimize_null_coefficient(&base, p);
    let shifted = ChebFunction::new(base.values().iter().map(|h| h + c).collect(), WeightClass::InvSqrt)?;
    Ok(shifted.point_values())
}

/// Full GMRES with right preconditioning.
fn gmres(
    apply: &dyn Fn(&DVector<Complex64>) -> DVector<Complex64>,
    precond: &dyn Fn(&DVector<Complex64>) -> Result<DVector<Complex64>>,
    b: &DVector<Complex64>,
    max_iter: usize,
    tol: f64,
) -> Result<(DVector<Complex64>, usize, f64)> {
    let n = b.len();
    let beta = b.norm();
    if beta == 0.0 {
        return Ok((DVector::zeros(n), 0, 0.0));
    }
    let mut v: Vec<DVector<Complex64>> = vec![b / Complex64::new(beta, 0.0)];
    let mut z: Vec<DVector<Complex64>> = Vec::new();
    let mut h = DMatrix::<Complex64>::zeros(max_iter + 1, max_iter);
    let mut cs: Vec<Complex64> = Vec::new();
    let mut sn: Vec<Complex64> = Vec::new();
    let mut g = DVector::<Complex64>::zeros(max_iter + 1);
    g[0] = Complex64::new(beta, 0.0);
    let mut k_done = 0;
    let mut res = beta;
    for k in 0..max_iter {
        let zk = precond(&v[k])?;
        let mut w = apply(&zk);
        z.push(zk);
        for _ in 0..2 {
            for (i, vi) in v.iter().enumerate() {
                let hij = vi.dotc(&w);
                h[(i, k)] += hij;
                w -= vi * hij;
            }
        }
        let hn = w.norm();
        h[(k + 1, k)] = Complex64::new(hn, 0.0);
        for i in 0..k {
            let t = cs[i].conj() * h[(i, k)] + sn[i].conj() * h[(i + 1, k)];
            h[(i + 1, k)] = -sn[i] * h[(i, k)] + cs[i] * h[(i + 1, k)];
            h[(i, k)] = t;
        }
        let a = h[(k, k)];
        let bb = h[(k + 1, k)];
        let r = (a.norm_sqr() + bb.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), ZERO)
        } else {
            (a / r, bb / r)
        };
        cs.push(c);
        sn.push(s);
        h[(k, k)] = Complex64::new(r, 0.0);
        h[(k + 1, k)] = ZERO;
        g[k + 1] = -s * g[k];
        g[k] = c.conj() * g[k];
        res = g[k + 1].norm();
        k_done = k + 1;
        if res <= tol * beta || hn == 0.0 {
            break;
        }
        v.push(w / Complex64::new(hn, 0.0));
    }
    let mut y = DVector::<Complex64>::zeros(k_done);
    for i in (0..k_done).rev() {
        let mut acc = g[i];
        for j in i + 1..k_done {
            acc -= h[(i, j)] * y[j];
        }
        y[i] = acc / h[(i, i)];
    }
    let mut x = DVector::<Complex64>::zeros(n);
    for (i, zi) in z.iter().take(k_done).enumerate() {
        x += zi * y[i];
    }
    Ok((x, k_done, res / beta))
}

/// Solves the Possio equation on the requested path; the decomposed path
/// falls back to the direct solve if its iteration stalls.
pub fn solve_possio(problem: &PossioProblem, path: SolvePath) -> Result<PossioSolution> {
    let basis = PossioBasis::new(problem.d_hat.n(), problem.line)?;
    solve_possio_with(&basis, problem, path)
}

pub fn solve_possio_with(
    basis: &PossioBasis,
    problem: &PossioProblem,
    path: SolvePath,
) -> Result<PossioSolution> {
    if basis.n != problem.d_hat.n() || basis.line != problem.line {
        return Err(Error::Incompatible("basis does not match problem grid".into()));
    }
    let d = DVector::from_column_slice(problem.d_hat.values());
    let n = basis.n;
    let mut warnings = Vec::new();
    if d.norm() == 0.0 {
        return Ok(PossioSolution {
            psi_hat: ChebFunction::zeros(n, WeightClass::Sqrt)?,
            residual: 0.0,
            path,
            iterations: 0,
            warnings,
        });
    }
    let (x, used, iterations, a) = match path {
        SolvePath::Direct => {
            let op = assemble_possio_operator(basis, problem.alpha, problem.beta, problem.u)?;
            if op.aliasing {
                warnings.push(format!("line grid refinement defect {:.3e}", op.refinement_defect));
            }
            (solve_direct(&op.matrix, &d)?, SolvePath::Direct, 0, op.matrix)
        }
        SolvePath::Decomposed => {
            let dec = decompose(basis, problem.alpha, problem.beta, problem.u)?;
            let lu = dec.s_block.clone().lu();
            let precond = |r: &DVector<Complex64>| -> Result<DVector<Complex64>> {
                let rv: Vec<Complex64> = r.iter().copied().collect();
                let hv = hilbert_pseudoinverse_values(&rv, 1.5)?;
                lu.solve(&DVector::from_vec(hv))
                    .ok_or_else(|| Error::Solver("singular S block".into()))
            };
            let full = dec.full.clone();
            let apply = |x: &DVector<Complex64>| &full * x;
            match gmres(&apply, &precond, &d, n, 1e-14) {
                Ok((x, it, _)) if relative_residual(&dec.full, &x, &d) < tolerances::POSSIO_RESIDUAL => {
                    (x, SolvePath::Decomposed, it, dec.full)
                }
                _ => {
                    warnings.push("decomposed iteration did not converge; direct fallback".into());
                    (solve_direct(&dec.full, &d)?, SolvePath::Direct, 0, dec.full)
                }
            }
        }
    };
    let residual = relative_residual(&a, &x, &d);
    if residual > tolerances::POSSIO_RESIDUAL {
        return Err(Error::NoConvergence { what: "Possio residual".into(), residual });
    }
    Ok(PossioSolution {
        psi_hat: ChebFunction::new(x.iter().copied().collect(), WeightClass::Sqrt)?,
        residual,
        path: used,
        iterations,
        warnings,
    })
}

/// Smooth bump of unit height supported in `(c - w, c + w)`.
pub fn bump(x: f64, center: f64, width: f64) -> f64 {
    let t = (x - center) / width;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// [`bump`] times `amp`, as sqrt-class node samples.
pub fn bump_sqrt_class(n: usize, center: f64, width: f64, amp: Complex64) -> Result<ChebFunction> {
    ChebFunction::from_complex_fn(n, WeightClass::Sqrt, |x| amp * bump(x, center, width) / (1.0 - x * x).sqrt())
}

/// Shared line-grid basis cache keyed by `(N, grid)`.
pub type SharedBasis = Arc<PossioBasis>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_grid_validation() {
        assert!(LineGrid::new(3.0, 1024).is_err());
        assert!(LineGrid::new(8.0, 1000).is_err());
        assert!(LineGrid::new(8.0, 1024).is_ok());
    }

    #[test]
    fn sobolev_norm_zero_and_scaling() {
        let line = LineGrid::new(8.0, 256).unwrap();
        let z = vec![ZERO; 256];
        assert_eq!(sobolev_trace_norm(&line, &z, -0.55), 0.0);
        let f: Vec<Complex64> =
            (0..256).map(|k| Complex64::new((-line.x(k).powi(2)).exp(), 0.0)).collect();
        let a = sobolev_trace_norm(&line, &f, -0.55);
        let g: Vec<Complex64> = f.iter().map(|v| v * Complex64::new(-3.0, 4.0)).collect();
        let b = sobolev_trace_norm(&line, &g, -0.55);
        assert!((b - 5.0 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn zero_downwash_gives_zero() {
        let line = LineGrid::new(8.0, 256).unwrap();
        let d = ChebFunction::zeros(16, WeightClass::Smooth).unwrap();
        let p = PossioProblem::new(d, 1.0, 0.0, 0.5, line).unwrap();
        let s = solve_possio(&p, SolvePath::Direct).unwrap();
        assert_eq!(s.residual, 0.0);
        assert_eq!(s.psi_hat.max_abs(), 0.0);
    }

    #[test]
    fn operator_is_linear_and_kills_zero() {
        let line = LineGrid::new(8.0, 512).unwrap();
        let basis = PossioBasis::new(16, line).unwrap();
        let op = assemble_possio_operator(&basis, 1.0, 2.0, 0.5).unwrap();
        let z = ChebFunction::zeros(16, WeightClass::Sqrt).unwrap();
        assert_eq!(op.apply(&z).unwrap().max_abs(), 0.0);
    }
}
