//! Fourier-Laplace symbols of the flow problem.
//!
//! With `tau = alpha + i beta`, dual variables `(eta_x, eta_y)` and
//! `z_U = beta + U eta_x`:
//!
//! ```text
//! D = tau^2 + 2 U i eta_x tau + (1-U^2) eta_x^2 + eta_y^2
//! m = -sqrt(D) / (tau + i U eta_x)              (principal root)
//! j = -i |eta_x| / eta_x,    S = -i sqrt(w^2 + 1 + (eta_y/eta_x)^2) / w,
//! w = tau/eta_x + i U,       m = j S
//! M = [S (1+eta^2)^(1/4)]^(-1)                  (1D, eta_y = 0)
//! ```

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tolerances;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One evaluation point `(alpha, beta, eta_x, eta_y, U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPoint {
    alpha: f64,
    beta: f64,
    eta_x: f64,
    eta_y: f64,
    u: f64,
}

impl SymbolPoint {
    pub fn new(alpha: f64, beta: f64, eta_x: f64, eta_y: f64, u: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        if !(0.0..1.0).contains(&u) {
            return Err(Error::InvalidInput(format!("U must lie in [0,1), got {u}")));
        }
        if !beta.is_finite() || !eta_x.is_finite() || !eta_y.is_finite() {
            return Err(Error::InvalidInput("non-finite symbol coordinate".into()));
        }
        Ok(Self { alpha, beta, eta_x, eta_y, u })
    }

    /// 1D reduction, `eta_y = 0`.
    pub fn one_d(alpha: f64, beta: f64, eta: f64, u: f64) -> Result<Self> {
        Self::new(alpha, beta, eta, 0.0, u)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn eta_x(&self) -> f64 {
        self.eta_x
    }
    pub fn eta_y(&self) -> f64 {
        self.eta_y
    }
    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn tau(&self) -> Complex64 {
        Complex64::new(self.alpha, self.beta)
    }

    pub fn z_u(&self) -> f64 {
        self.beta + self.u * self.eta_x
    }

    pub fn eta_norm(&self) -> f64 {
        self.eta_x.hypot(self.eta_y)
    }
}

/// `D` as written in the symbol definition.
pub fn eval_d(p: &SymbolPoint) -> Complex64 {
    let tau = p.tau();
    let d = tau * tau
        + 2.0 * p.u * I * p.eta_x * tau
        + (1.0 - p.u * p.u) * p.eta_x * p.eta_x
        + p.eta_y * p.eta_y;
    debug_assert!(
        (d - eval_d_split(p)).norm() <= tolerances::SPLIT_FORM * split_scale(p),
        "split form disagrees"
    );
    d
}

/// Real/imaginary split form of `D`.
pub fn eval_d_split(p: &SymbolPoint) -> Complex64 {
    let (a, b, ex, ey, u) = (p.alpha, p.beta, p.eta_x, p.eta_y, p.u);
    Complex64::new(
        a * a - b * b + (1.0 - u * u) * ex * ex + ey * ey - 2.0 * u * b * ex,
        2.0 * a * (u * ex + b),
    )
}

/// Magnitude scale used to compare the two forms of `D`.
pub fn split_scale(p: &SymbolPoint) -> f64 {
    1.0 + p.alpha * p.alpha + p.beta * p.beta + p.eta_x * p.eta_x + p.eta_y * p.eta_y
}

/// `m`, and when defined the factors `j`, `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factored {
    pub m: Complex64,
    pub j: Option<Complex64>,
    pub s: Option<Complex64>,
    /// `eta_x = 0`: `j` has no sign, only `m` is returned.
    pub degenerate: bool,
    /// `D` on the negative real axis, the cut of the principal root.
    pub branch_ambiguous: bool,
}

impl Factored {
    /// `|j S - m|`, if the factors exist.
    pub fn mismatch(&self) -> Option<f64> {
        match (self.j, self.s) {
            (Some(j), Some(s)) => Some((j * s - self.m).norm()),
            _ => None,
        }
    }
}

pub fn eval_m(p: &SymbolPoint) -> Complex64 {
    -eval_d(p).sqrt() / (p.tau() + I * p.u * p.eta_x)
}

pub fn eval_j(eta_x: f64) -> Option<Complex64> {
    if eta_x == 0.0 {
        None
    } else {
        Some(-I * eta_x.abs() / eta_x)
    }
}

pub fn eval_s(p: &SymbolPoint) -> Option<Complex64> {
    if p.eta_x == 0.0 {
        return None;
    }
    let w = p.tau() / p.eta_x + I * p.u;
    let r = p.eta_y / p.eta_x;
    Some(-I * (w * w + 1.0 + r * r).sqrt() / w)
}

pub fn eval_m_factored(p: &SymbolPoint) -> Factored {
    let d = eval_d(p);
    let m = -d.sqrt() / (p.tau() + I * p.u * p.eta_x);
    Factored {
        m,
        j: eval_j(p.eta_x),
        s: eval_s(p),
        degenerate: p.eta_x == 0.0,
        branch_ambiguous: d.im == 0.0 && d.re < 0.0,
    }
}

/// Region of the `(z_U, eta)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    A,
    B,
    C,
}

impl Case {
    /// Ties on `|z_U| = |eta|/2` and `|z_U| = 2|eta|` fall in `B`.
    pub fn classify(z_u: f64, eta: f64) -> Case {
        let (z, e) = (z_u.abs(), eta.abs());
        if z < 0.5 * e {
            Case::A
        } else if z <= 2.0 * e {
            Case::B
        } else {
            Case::C
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Case::A => "A",
            Case::B => "B",
            Case::C => "C",
        }
    }
}

/// Case bound on `|M|` with exponent `q` (`1/4` in the lemma).
pub fn case_bound(case: Case, alpha: f64, eta: f64, q: f64) -> f64 {
    match case {
        Case::A => (2.0 / (1.0 + eta * eta)).powf(q),
        Case::B => (5.0 + 8.0 * alpha * alpha).powf(q),
        Case::C => (81.0 / (1.0 + eta * eta)).powf(q),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MValue {
    pub m: Complex64,
    pub case: Case,
}

/// `M` of the 1D reduction and its case label.
pub fn eval_big_m(p: &SymbolPoint) -> Result<MValue> {
    if p.eta_y != 0.0 {
        return Err(Error::InvalidInput("M is defined for the 1D reduction".into()));
    }
    let eta = p.eta_x;
    let scale = (1.0 + eta * eta).powf(0.25);
    let m = match eval_s(p) {
        Some(s) => 1.0 / (s * scale),
        None => 1.0 / (eval_m(p) * scale),
    };
    Ok(MValue { m, case: Case::classify(p.z_u(), eta) })
}

/// `|M|` directly from `(alpha, z_U, eta)`.
pub fn abs_m(alpha: f64, z_u: f64, eta: f64) -> f64 {
    let w = Complex64::new(alpha, z_u);
    let d = w * w + eta * eta;
    w.norm() / (d.norm().sqrt() * (1.0 + eta * eta).powf(0.25))
}

/// `S` of the 1D reduction in `(z_U, eta)` variables; `m` at `eta = 0`.
pub fn s_of(alpha: f64, z_u: f64, eta: f64) -> Complex64 {
    let w = Complex64::new(alpha, z_u);
    if eta == 0.0 {
        return Complex64::new(-1.0, 0.0);
    }
    -I * eta * ((w * w + eta * eta) / (eta * eta)).sqrt() / w
}

/// `m` of the 1D reduction in `(z_U, eta)` variables.
pub fn m_of(alpha: f64, z_u: f64, eta: f64) -> Complex64 {
    let w = Complex64::new(alpha, z_u);
    -(w * w + eta * eta).sqrt() / w
}

/// Closed interval sampled at `n` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn point(&self, k: usize) -> f64 {
        if self.n <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundGrid {
    pub alpha: Axis,
    pub eta: Axis,
    pub z_u: Axis,
}

impl Default for BoundGrid {
    fn default() -> Self {
        Self {
            alpha: Axis::new(0.1, 10.0, 100),
            eta: Axis::new(-100.0, 100.0, 100),
            z_u: Axis::new(-100.0, 100.0, 100),
        }
    }
}

impl BoundGrid {
    pub fn len(&self) -> usize {
        self.alpha.n * self.eta.n * self.z_u.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub alpha: f64,
    pub eta: f64,
    pub z_u: f64,
    pub case: Case,
    pub abs_m: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Result of a grid certification of the case bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub points: usize,
    pub violations: usize,
    pub violations_by_case: [usize; 3],
    pub points_by_case: [usize; 3],
    /// Most negative margin per case.
    pub worst_margin: [f64; 3],
    pub worst_row: Option<BoundRow>,
    /// Smallest constant in `|M| <= C [1 + alpha^2 + 1/(1+eta^2)]^(1/4)`.
    pub fitted_upper: f64,
    /// Largest constant in
    /// `(1+eta^2)^(1/4)|S| >= c [(1+eta^2)/((1+eta^2)(1+alpha^2)+1)]^(1/4)`.
    pub fitted_lower: f64,
    /// `max |j S - m|` over points with `eta != 0`.
    pub factorization_max: f64,
    pub factorization_points: usize,
    pub rows: Vec<BoundRow>,
}

#[derive(Debug, Clone, Copy)]
struct Partial {
    points: usize,
    violations: usize,
    vbc: [usize; 3],
    pbc: [usize; 3],
    worst: [f64; 3],
    worst_row: Option<BoundRow>,
    upper: f64,
    lower: f64,
    fact: f64,
    fact_points: usize,
}

impl Partial {
    fn empty() -> Self {
        Self {
            points: 0,
            violations: 0,
            vbc: [0; 3],
            pbc: [0; 3],
            worst: [f64::INFINITY; 3],
            worst_row: None,
            upper: 0.0,
            lower: f64::INFINITY,
            fact: 0.0,
            fact_points: 0,
        }
    }

    fn merge(mut self, o: Partial) -> Partial {
        self.points += o.points;
        self.violations += o.violations;
        for k in 0..3 {
            self.vbc[k] += o.vbc[k];
            self.pbc[k] += o.pbc[k];
            self.worst[k] = self.worst[k].min(o.worst[k]);
        }
        self.worst_row = match (self.worst_row, o.worst_row) {
            (Some(a), Some(b)) => Some(if b.margin < a.margin { b } else { a }),
            (a, b) => a.or(b),
        };
        self.upper = self.upper.max(o.upper);
        self.lower = self.lower.min(o.lower);
        self.fact = self.fact.max(o.fact);
        self.fact_points += o.fact_points;
        self
    }
}

fn case_index(c: Case) -> usize {
    match c {
        Case::A => 0,
        Case::B => 1,
        Case::C => 2,
    }
}

/// Evaluates one grid point of the certification.
pub fn bound_row(alpha: f64, eta: f64, z_u: f64, exponent: f64) -> BoundRow {
    let case = Case::classify(z_u, eta);
    let a = abs_m(alpha, z_u, eta);
    let bound = case_bound(case, alpha, eta, exponent);
    BoundRow { alpha, eta, z_u, case, abs_m: a, bound, margin: bound - a }
}

/// Certifies the case bounds of `|M|` on a grid, with `exponent` the power
/// applied to each case constant (`1/4` in the lemma). Rows are retained
/// only when `keep_rows` is set.
pub fn verify_multiplier_bounds(grid: &BoundGrid, exponent: f64, keep_rows: bool) -> BoundReport {
    let slack = tolerances::BOUND_SLACK;
    let per_alpha: Vec<(Partial, Vec<BoundRow>)> = (0..grid.alpha.n)
        .into_par_iter()
        .map(|ia| {
            let alpha = grid.alpha.point(ia);
            let mut part = Partial::empty();
            let mut rows = Vec::new();
            for ie in 0..grid.eta.n {
                let eta = grid.eta.point(ie);
                let shape = 1.0 + alpha * alpha + 1.0 / (1.0 + eta * eta);
                let e2 = 1.0 + eta * eta;
                let lower_shape = (e2 / (e2 * (1.0 + alpha * alpha) + 1.0)).powf(0.25);
                for iz in 0..grid.z_u.n {
                    let z = grid.z_u.point(iz);
                    let row = bound_row(alpha, eta, z, exponent);
                    let k = case_index(row.case);
                    part.points += 1;
                    part.pbc[k] += 1;
                    part.worst[k] = part.worst[k].min(row.margin);
                    if row.margin < -slack {
                        part.violations += 1;
                        part.vbc[k] += 1;
                    }
                    if part.worst_row.is_none_or(|w| row.margin < w.margin) {
                        part.worst_row = Some(row);
                    }
                    part.upper = part.upper.max(row.abs_m / shape.powf(0.25));
                    let s_scaled = e2.powf(0.25) * s_of(alpha, z, eta).norm();
                    part.lower = part.lower.min(s_scaled / lower_shape);
                    if eta != 0.0 {
                        let j = eval_j(eta).unwrap_or_default();
                        let mis = (j * s_of(alpha, z, eta) - m_of(alpha, z, eta)).norm();
                        part.fact = part.fact.max(mis);
                        part.fact_points += 1;
                    }
                    if keep_rows {
                        rows.push(row);
                    }
                }
            }
            (part, rows)
        })
        .collect();
    let mut total = Partial::empty();
    let mut rows = Vec::new();
    for (p, r) in per_alpha {
        total = total.merge(p);
        rows.extend(r);
    }
    BoundReport {
        points: total.points,
        violations: total.violations,
        violations_by_case: total.vbc,
        points_by_case: total.pbc,
        worst_margin: total.worst,
        worst_row: total.worst_row,
        fitted_upper: total.upper,
        fitted_lower: total.lower,
        factorization_max: total.fact,
        factorization_points: total.fact_points,
        rows,
    }
}

impl BoundReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "alpha,eta,z_U,case,absM,bound,margin")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e}",
                r.alpha,
                r.eta,
                r.z_u,
                r.case.label(),
                r.abs_m,
                r.bound,
                r.margin
            )?;
        }
        Ok(())
    }
}

/// Pointwise multiplication by `S(tau, eta)` (or `1/S`) on a line of dual
/// samples; the `eta = 0` mode uses `m(tau, 0) = -1`.
pub fn apply_s_multiplier(
    psi_hat: &[Complex64],
    etas: &[f64],
    alpha: f64,
    beta: f64,
    u: f64,
    inverse: bool,
) -> Result<Vec<Complex64>> {
    if psi_hat.len() != etas.len() {
        return Err(Error::InvalidInput("sample and grid lengths differ".into()));
    }
    let mut out = Vec::with_capacity(psi_hat.len());
    for (&v, &eta) in psi_hat.iter().zip(etas) {
        let p = SymbolPoint::one_d(alpha, beta, eta, u)?;
        let s = eval_s(&p).unwrap_or_else(|| eval_m(&p));
        if s.norm() < tolerances::MULTIPLIER_FLOOR {
            return Err(Error::NoConvergence { what: "multiplier S vanishes".into(), residual: s.norm() });
        }
        out.push(if inverse { v / s } else { v * s });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_examples() {
        let p = SymbolPoint::new(1.0, 0.0, 0.0, 0.0, 0.3).unwrap();
        assert!((eval_d(&p) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let p = SymbolPoint::new(1.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert!((eval_d(&p) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_invalid_points() {
        assert!(SymbolPoint::new(0.0, 0.0, 1.0, 0.0, 0.5).is_err());
        assert!(SymbolPoint::new(1.0, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(SymbolPoint::new(1.0, 0.0, 1.0, 0.0, -0.1).is_err());
    }

    #[test]
    fn m_at_zero_frequency() {
        for &(a, b, u) in &[(1.0, 0.0, 0.0), (0.3, -4.0, 0.5), (2.0, 7.0, 0.9)] {
            let f = eval_m_factored(&SymbolPoint::new(a, b, 0.0, 0.0, u).unwrap());
            assert!((f.m + 1.0).norm() < 1e-14);
            assert!(f.degenerate);
            assert!(f.j.is_none());
        }
    }

    #[test]
    fn j_sign() {
        assert_eq!(eval_j(-3.0), Some(I));
        assert_eq!(eval_j(2.0), Some(-I));
        assert_eq!(eval_j(0.0), None);
    }

    #[test]
    fn factorization_example() {
        let f = eval_m_factored(&SymbolPoint::new(1.0, 0.0, 1.0, 0.0, 0.0).unwrap());
        assert!((f.m + Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(f.mismatch().unwrap() < 1e-15);
    }

    #[test]
    fn case_ties_go_to_b() {
        assert_eq!(Case::classify(0.5, 1.0), Case::B);
        assert_eq!(Case::classify(-2.0, 1.0), Case::B);
        assert_eq!(Case::classify(0.0, 0.0), Case::B);
        assert_eq!(Case::classify(0.49, 1.0), Case::A);
        assert_eq!(Case::classify(2.01, 1.0), Case::C);
    }

    #[test]
    fn abs_m_matches_complex_m() {
        for &(a, b, e, u) in &[(1.0, 0.3, 2.0, 0.5), (0.2, -3.0, -7.0, 0.1), (4.0, 1.0, 0.5, 0.0)] {
            let p = SymbolPoint::one_d(a, b, e, u).unwrap();
            let mv = eval_big_m(&p).unwrap();
            assert!((mv.m.norm() - abs_m(a, p.z_u(), e)).abs() < 1e-14);
        }
    }

    #[test]
    fn s_round_trip() {
        let etas: Vec<f64> = (-8..8).map(|k| k as f64 * 0.7).collect();
        let v: Vec<Complex64> = etas.iter().map(|e| Complex64::new(e.cos(), e.sin() * 0.5)).collect();
        let s = apply_s_multiplier(&v, &etas, 1.0, 0.4, 0.5, false).unwrap();
        let back = apply_s_multiplier(&s, &etas, 1.0, 0.4, 0.5, true).unwrap();
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
