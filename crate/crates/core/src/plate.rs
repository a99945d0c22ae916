//! Clamped plate on an interval (beam reduction) or a rectangle, with the
//! Kirchhoff, von Karman and Berger nonlinearities and their potentials.
//!
//! The stiffness is assembled as `A = L^T W L` where `L` is the five-point
//! Laplacian evaluated at every grid node (boundary nodes included, with the
//! clamped ghost reflection `u_ghost = u_inner`) and `W` holds trapezoid
//! weights. `A / cell` is the standard 5-point (1D) or 13-point (2D) clamped
//! biharmonic stencil in the interior, and `u^T A u` is the discrete
//! `||Delta u||^2`. Every force below is the exact gradient of its discrete
//! potential in the mass inner product `<a, b>_M = cell * a.b`.

use crate::error::{Error, Result};
use crate::sparse::{dot, Csr, Factorization, Triplets};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlateGrid {
    /// `(-1, 1)` split into `cells` intervals.
    Interval { cells: usize },
    /// `[0, width] x [0, height]` with `nx x ny` cells.
    Rectangle { nx: usize, ny: usize, width: f64, height: f64 },
}

impl PlateGrid {
    pub fn interval(cells: usize) -> Result<Self> {
        if cells < 4 {
            return Err(Error::InvalidInput(format!("plate needs at least 4 cells, got {cells}")));
        }
        Ok(PlateGrid::Interval { cells })
    }

    pub fn rectangle(nx: usize, ny: usize, width: f64, height: f64) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidInput(format!("plate needs at least 4x4 cells, got {nx}x{ny}")));
        }
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::InvalidInput("rectangle sides must be positive".into()));
        }
        Ok(PlateGrid::Rectangle { nx, ny, width, height })
    }

    pub fn is_2d(&self) -> bool {
        matches!(self, PlateGrid::Rectangle { .. })
    }

    /// Number of interior (unknown) nodes.
    pub fn dim(&self) -> usize {
        match *self {
            PlateGrid::Interval { cells } => cells - 1,
            PlateGrid::Rectangle { nx, ny, .. } => (nx - 1) * (ny - 1),
        }
    }

    pub fn spacing(&self) -> (f64, f64) {
        match *self {
            PlateGrid::Interval { cells } => (2.0 / cells as f64, 1.0),
            PlateGrid::Rectangle { nx, ny, width, height } => (width / nx as f64, height / ny as f64),
        }
    }

    /// Lumped mass per node.
    pub fn cell(&self) -> f64 {
        let (a, b) = self.spacing();
        a * b
    }

    /// Same domain, halved spacing.
    pub fn refined(&self) -> Self {
        match *self {
            PlateGrid::Interval { cells } => PlateGrid::Interval { cells: 2 * cells },
            PlateGrid::Rectangle { nx, ny, width, height } => {
                PlateGrid::Rectangle { nx: 2 * nx, ny: 2 * ny, width, height }
            }
        }
    }

    /// Coordinates of the interior nodes, `(x, y)` with `y = 0` in 1D.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        match *self {
            PlateGrid::Interval { cells } => {
                let h = 2.0 / cells as f64;
                (1..cells).map(|k| (-1.0 + k as f64 * h, 0.0)).collect()
            }
            PlateGrid::Rectangle { nx, ny, .. } => {
                let (hx, hy) = self.spacing();
                let mut out = Vec::with_capacity(self.dim());
                for j in 1..ny {
                    for i in 1..nx {
                        out.push((i as f64 * hx, j as f64 * hy));
                    }
                }
                out
            }
        }
    }

    /// Samples `f` at the interior nodes.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.nodes().into_iter().map(|(x, y)| f(x, y)).collect()
    }

    fn full_shape(&self) -> (usize, usize) {
        match *self {
            PlateGrid::Interval { cells } => (cells + 1, 1),
            PlateGrid::Rectangle { nx, ny, .. } => (nx + 1, ny + 1),
        }
    }

    /// Interior index of full-grid node `(i, j)`, if interior.
    fn interior_index(&self, i: i64, j: i64) -> Option<usize> {
        match *self {
            PlateGrid::Interval { cells } => {
                (i >= 1 && i < cells as i64).then(|| i as usize - 1)
            }
            PlateGrid::Rectangle { nx, ny, .. } => (i >= 1 && i < nx as i64 && j >= 1 && j < ny as i64)
                .then(|| (j as usize - 1) * (nx - 1) + i as usize - 1),
        }
    }

    /// Reflected index for the clamped ghost: `-1 -> 1`, `n+1 -> n-1`.
    fn reflect(k: i64, n: usize) -> i64 {
        if k < 0 {
            -k
        } else if k > n as i64 {
            2 * n as i64 - k
        } else {
            k
        }
    }

    /// Laplacian at every full-grid node as a matrix on interior values,
    /// together with the trapezoid weights of those nodes.
    fn node_laplacian(&self) -> (Triplets, Vec<f64>) {
        let (nfx, nfy) = self.full_shape();
        let (hx, hy) = self.spacing();
        let mut l = Triplets::new(nfx * nfy, self.dim());
        let mut w = vec![0.0; nfx * nfy];
        let edge = |k: usize, n: usize| if k == 0 || k == n { 0.5 } else { 1.0 };
        for j in 0..nfy {
            for i in 0..nfx {
                let row = j * nfx + i;
                let (ii, jj) = (i as i64, j as i64);
                let mut push = |a: i64, b: i64, c: f64| {
                    let a = Self::reflect(a, nfx - 1);
                    let b = if nfy > 1 { Self::reflect(b, nfy - 1) } else { b };
                    if let Some(col) = self.interior_index(a, b) {
                        l.add(row, col, c);
                    }
                };
                push(ii - 1, jj, 1.0 / (hx * hx));
                push(ii, jj, -2.0 / (hx * hx));
                push(ii + 1, jj, 1.0 / (hx * hx));
                if self.is_2d() {
                    push(ii, jj - 1, 1.0 / (hy * hy));
                    push(ii, jj, -2.0 / (hy * hy));
                    push(ii, jj + 1, 1.0 / (hy * hy));
                    w[row] = hx * hy * edge(i, nfx - 1) * edge(j, nfy - 1);
                } else {
                    w[row] = hx * edge(i, nfx - 1);
                }
            }
        }
        (l, w)
    }

    /// Clamped biharmonic stiffness `L^T W L`.
    pub fn stiffness(&self) -> Triplets {
        let (l, w) = self.node_laplacian();
        let n = self.dim();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); w.len()];
        for (r, c, v) in l.iter() {
            rows[r].push((c, v));
        }
        let mut a = Triplets::new(n, n);
        for (row, wr) in rows.iter().zip(&w) {
            for &(p, lp) in row {
                for &(q, lq) in row {
                    a.add(p, q, wr * lp * lq);
                }
            }
        }
        a
    }

    /// Dirichlet form: `u^T K u` is the discrete `int |grad u|^2`.
    pub fn gradient_form(&self) -> Triplets {
        let n = self.dim();
        let (nfx, nfy) = self.full_shape();
        let (hx, hy) = self.spacing();
        let mut k = Triplets::new(n, n);
        let mut edge = |a: Option<usize>, b: Option<usize>, c: f64| {
            for (p, sp) in [(a, 1.0), (b, -1.0)] {
                for (q, sq) in [(a, 1.0), (b, -1.0)] {
                    if let (Some(p), Some(q)) = (p, q) {
                        k.add(p, q, c * sp * sq);
                    }
                }
            }
        };
        if self.is_2d() {
            for j in 0..nfy as i64 {
                for i in 0..nfx as i64 - 1 {
                    edge(self.interior_index(i, j), self.interior_index(i + 1, j), hy / hx);
                }
            }
            for j in 0..nfy as i64 - 1 {
                for i in 0..nfx as i64 {
                    edge(self.interior_index(i, j), self.interior_index(i, j + 1), hx / hy);
                }
            }
        } else {
            for i in 0..nfx as i64 - 1 {
                edge(self.interior_index(i, 0), self.interior_index(i + 1, 0), 1.0 / hx);
            }
        }
        k
    }

    /// Zero extension of interior values to the full node grid.
    pub fn extend(&self, u: &[f64]) -> Vec<f64> {
        let (nfx, nfy) = self.full_shape();
        let mut out = vec![0.0; nfx * nfy];
        for j in 0..nfy as i64 {
            for i in 0..nfx as i64 {
                if let Some(k) = self.interior_index(i, j) {
                    out[j as usize * nfx + i as usize] = u[k];
                }
            }
        }
        out
    }
}

/// Assembled operators of one grid; read-only after construction.
#[derive(Debug)]
pub struct PlateOperator {
    pub grid: PlateGrid,
    stiffness: Triplets,
    a: Csr,
    k: Csr,
    factor: Factorization,
}

impl PlateOperator {
    pub fn new(grid: PlateGrid) -> Result<Self> {
        let stiffness = grid.stiffness();
        let factor = stiffness.factor()?;
        Ok(Self {
            grid,
            a: stiffness.to_csr(),
            k: grid.gradient_form().to_csr(),
            stiffness,
            factor,
        })
    }

    pub fn stiffness(&self) -> &Triplets {
        &self.stiffness
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn cell(&self) -> f64 {
        self.grid.cell()
    }

    /// `A u` (weak form; `u^T A u = ||Delta u||^2`).
    pub fn stiffness_apply(&self, u: &[f64]) -> Vec<f64> {
        self.a.apply(u)
    }

    /// Strong biharmonic `A u / cell`.
    pub fn biharmonic_apply(&self, u: &[f64]) -> Vec<f64> {
        let c = self.cell();
        self.a.apply(u).into_iter().map(|v| v / c).collect()
    }

    /// `||Delta u||^2`.
    pub fn laplacian_norm_sq(&self, u: &[f64]) -> f64 {
        dot(u, &self.a.apply(u))
    }

    /// `int |grad u|^2`.
    pub fn gradient_norm_sq(&self, u: &[f64]) -> f64 {
        dot(u, &self.k.apply(u))
    }

    pub fn mass_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.cell() * dot(a, b)
    }

    /// Solves `Delta^2 w = rhs` with clamped conditions.
    pub fn biharmonic_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let c = self.cell();
        let b: Vec<f64> = rhs.iter().map(|v| v * c).collect();
        self.factor.solve(&b)
    }

    /// Smallest eigenvalue of `A / cell` by inverse iteration.
    pub fn smallest_eigenvalue(&self) -> Result<f64> {
        let mut x = self.grid.sample(|x, y| match self.grid {
            PlateGrid::Interval { .. } => (1.0 - x * x).powi(2),
            PlateGrid::Rectangle { width, height, .. } => {
                (x * (width - x) * y * (height - y)).powi(2)
            }
        });
        let mut lambda = f64::INFINITY;
        let mut change = f64::INFINITY;
        for _ in 0..500 {
            let nx = dot(&x, &x).sqrt();
            x.iter_mut().for_each(|v| *v /= nx);
            let next = self.biharmonic_solve(&x)?;
            let ray = dot(&x, &self.biharmonic_apply(&x));
            change = (ray - lambda).abs() / ray;
            lambda = ray;
            x = next;
            if change <= 1e-13 {
                return Ok(lambda);
            }
        }
        if change <= 1e-10 {
            return Ok(lambda);
        }
        Err(Error::NoConvergence { what: "inverse iteration".into(), residual: change })
    }
}

/// `biharmonic_apply` on a grid without a cached operator.
pub fn biharmonic_apply(grid: &PlateGrid, u: &[f64]) -> Result<Vec<f64>> {
    check_len(grid, u)?;
    let c = grid.cell();
    Ok(grid.stiffness().to_csr().apply(u).into_iter().map(|v| v / c).collect())
}

/// First clamped eigenvalue on `grid` and its refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda1 {
    pub coarse: f64,
    pub fine: f64,
    /// `(4 fine - coarse) / 3`.
    pub extrapolated: f64,
}

pub fn biharmonic_lambda1(grid: &PlateGrid) -> Result<Lambda1> {
    let coarse = PlateOperator::new(*grid)?.smallest_eigenvalue()?;
    let fine = PlateOperator::new(grid.refined())?.smallest_eigenvalue()?;
    Ok(Lambda1 { coarse, fine, extrapolated: (4.0 * fine - coarse) / 3.0 })
}

fn check_len(grid: &PlateGrid, u: &[f64]) -> Result<()> {
    if u.len() != grid.dim() {
        return Err(Error::Incompatible(format!("field of length {} on grid of {} nodes", u.len(), grid.dim())));
    }
    if let Some(k) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    Ok(())
}

/// Von Karman bracket `u_xx w_yy + u_yy w_xx - 2 u_xy w_xy` by centered
/// differences at the interior nodes; `u`, `w` are full-grid samples
/// (`(nx+1)(ny+1)`, row-major in `y`).
pub fn vk_bracket(grid: &PlateGrid, u: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let PlateGrid::Rectangle { nx, ny, .. } = *grid else {
        return Err(Error::InvalidInput("von Karman bracket needs a 2D plate".into()));
    };
    let nf = (nx + 1) * (ny + 1);
    if u.len() != nf || w.len() != nf {
        return Err(Error::Incompatible("bracket expects full-grid samples".into()));
    }
    let (hx, hy) = grid.spacing();
    let at = |f: &[f64], i: usize, j: usize| f[j * (nx + 1) + i];
    let d2 = |f: &[f64], i: usize, j: usize| {
        let xx = (at(f, i + 1, j) - 2.0 * at(f, i, j) + at(f, i - 1, j)) / (hx * hx);
        let yy = (at(f, i, j + 1) - 2.0 * at(f, i, j) + at(f, i, j - 1)) / (hy * hy);
        let xy = (at(f, i + 1, j + 1) - at(f, i + 1, j - 1) - at(f, i - 1, j + 1) + at(f, i - 1, j - 1))
            / (4.0 * hx * hy);
        (xx, yy, xy)
    };
    let mut out = Vec::with_capacity(grid.dim());
    for j in 1..ny {
        for i in 1..nx {
            let (uxx, uyy, uxy) = d2(u, i, j);
            let (wxx, wyy, wxy) = d2(w, i, j);
            out.push(uxx * wyy + uyy * wxx - 2.0 * uxy * wxy);
        }
    }
    Ok(out)
}

fn bracket_interior(grid: &PlateGrid, u: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    vk_bracket(grid, &grid.extend(u), &grid.extend(w))
}

/// Airy stress function: `Delta^2 v = -[u, u]`, clamped.
pub fn airy_solve(op: &PlateOperator, u: &[f64]) -> Result<Vec<f64>> {
    check_len(&op.grid, u)?;
    let b = bracket_interior(&op.grid, u, u)?;
    let rhs: Vec<f64> = b.into_iter().map(|v| -v).collect();
    op.biharmonic_solve(&rhs)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// Pointwise `f(s) = cubic s^3 + linear s`.
    Kirchhoff { cubic: f64, linear: f64 },
    /// `f(u) = -[u, v(u) + F0]` with in-plane load `f0` at the interior nodes.
    VonKarman { f0: Vec<f64> },
    /// Gradient of `(kappa/4)(int |grad u|^2)^2 - (gamma/2) int |grad u|^2`.
    Berger { kappa: f64, gamma: f64 },
}

impl Nonlinearity {
    pub fn label(&self) -> &'static str {
        match self {
            Nonlinearity::Kirchhoff { .. } => "kirchhoff",
            Nonlinearity::VonKarman { .. } => "vonkarman",
            Nonlinearity::Berger { .. } => "berger",
        }
    }

    pub fn validate(&self, op: &PlateOperator) -> Result<()> {
        match self {
            Nonlinearity::Kirchhoff { cubic, linear } => {
                if !cubic.is_finite() || !linear.is_finite() {
                    return Err(Error::InvalidInput("Kirchhoff coefficients must be finite".into()));
                }
            }
            Nonlinearity::VonKarman { f0 } => {
                if !op.grid.is_2d() {
                    return Err(Error::InvalidInput("von Karman needs a 2D plate".into()));
                }
                check_len(&op.grid, f0)?;
            }
            Nonlinearity::Berger { kappa, gamma } => {
                if !(*kappa > 0.0) || !gamma.is_finite() {
                    return Err(Error::InvalidInput("Berger needs kappa > 0 and finite Gamma".into()));
                }
            }
        }
        Ok(())
    }

    /// Warnings for a Kirchhoff force whose asymptotic slope
    /// `liminf f(s)/s` does not exceed `-lambda1`.
    pub fn growth_warnings(&self, lambda1: f64) -> Vec<String> {
        match *self {
            Nonlinearity::Kirchhoff { cubic, linear } => {
                let ok = cubic > 0.0 || (cubic == 0.0 && linear > -lambda1);
                if ok {
                    Vec::new()
                } else {
                    vec![format!(
                        "Kirchhoff force with cubic {cubic}, linear {linear} violates liminf f(s)/s > -lambda1 = {:.4}; global existence not guaranteed",
                        -lambda1
                    )]
                }
            }
            _ => Vec::new(),
        }
    }
}

/// Nodal force `f(u)`, the `M`-gradient of [`plate_potential`].
pub fn plate_force(op: &PlateOperator, u: &[f64], kind: &Nonlinearity) -> Result<Vec<f64>> {
    check_len(&op.grid, u)?;
    kind.validate(op)?;
    match kind {
        Nonlinearity::Kirchhoff { cubic, linear } => {
            Ok(u.iter().map(|s| cubic * s * s * s + linear * s).collect())
        }
        Nonlinearity::Berger { kappa, gamma } => {
            let ku = op.k.apply(u);
            let factor = (kappa * dot(u, &ku) - gamma) / op.cell();
            Ok(ku.into_iter().map(|v| factor * v).collect())
        }
        Nonlinearity::VonKarman { f0 } => {
            let v = airy_solve(op, u)?;
            let load: Vec<f64> = v.iter().zip(f0).map(|(a, b)| a + b).collect();
            // f = -B_u^T (v + F0), B_u h = [u, h]; B_u^T via bracket symmetry
            bracket_transpose(op, u, &load).map(|g| g.into_iter().map(|x| -x).collect())
        }
    }
}

/// `B_u^T z` where `B_u h = [u, h]` at the interior nodes.
fn bracket_transpose(op: &PlateOperator, u: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let n = op.dim();
    let grid = op.grid;
    let PlateGrid::Rectangle { nx, .. } = grid else {
        return Err(Error::InvalidInput("von Karman needs a 2D plate".into()));
    };
    let (hx, hy) = grid.spacing();
    let full_u = grid.extend(u);
    let nfx = nx + 1;
    let at = |i: usize, j: usize| full_u[j * nfx + i];
    let mut out = vec![0.0; n];
    // row (i,j) of B_u: uxx*D_yy + uyy*D_xx - 2 uxy*D_xy applied to h
    for (row, &(x, y)) in grid.nodes().iter().enumerate() {
        let i = (x / hx).round() as usize;
        let j = (y / hy).round() as usize;
        let uxx = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (hx * hx);
        let uyy = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (hy * hy);
        let uxy = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4.0 * hx * hy);
        let zr = z[row];
        let mut put = |di: i64, dj: i64, c: f64| {
            if let Some(col) = grid.interior_index(i as i64 + di, j as i64 + dj) {
                out[col] += c * zr;
            }
        };
        put(0, -1, uxx / (hy * hy));
        put(0, 0, -2.0 * uxx / (hy * hy) - 2.0 * uyy / (hx * hx));
        put(0, 1, uxx / (hy * hy));
        put(-1, 0, uyy / (hx * hx));
        put(1, 0, uyy / (hx * hx));
        let c = -2.0 * uxy / (4.0 * hx * hy);
        put(1, 1, c);
        put(-1, -1, c);
        put(1, -1, -c);
        put(-1, 1, -c);
    }
    Ok(out)
}

/// Discrete potential `Pi(u)` whose `M`-gradient is [`plate_force`].
pub fn plate_potential(op: &PlateOperator, u: &[f64], kind: &Nonlinearity) -> Result<f64> {
    check_len(&op.grid, u)?;
    kind.validate(op)?;
    match kind {
        Nonlinearity::Kirchhoff { cubic, linear } => Ok(op.cell()
            * u.iter().map(|s| 0.25 * cubic * s.powi(4) + 0.5 * linear * s * s).sum::<f64>()),
        Nonlinearity::Berger { kappa, gamma } => {
            let g = op.gradient_norm_sq(u);
            Ok(0.25 * kappa * g * g - 0.5 * gamma * g)
        }
        Nonlinearity::VonKarman { f0 } => {
            let v = airy_solve(op, u)?;
            let b = bracket_interior(&op.grid, u, u)?;
            Ok(0.25 * op.laplacian_norm_sq(&v) - 0.5 * op.mass_dot(&b, f0))
        }
    }
}

/// `|<f(u), h> - (Pi(u+eps h) - Pi(u-eps h))/(2 eps)| / (|<f(u), h>| + 1)`.
pub fn potential_gradient_check(
    op: &PlateOperator,
    u: &[f64],
    h: &[f64],
    kind: &Nonlinearity,
    eps: f64,
) -> Result<f64> {
    check_len(&op.grid, h)?;
    let f = plate_force(op, u, kind)?;
    let exact = op.mass_dot(&f, h);
    let shift = |s: f64| -> Vec<f64> { u.iter().zip(h).map(|(a, b)| a + s * b).collect() };
    let fd = (plate_potential(op, &shift(eps), kind)? - plate_potential(op, &shift(-eps), kind)?)
        / (2.0 * eps);
    Ok((exact - fd).abs() / (exact.abs() + 1.0))
}

/// Constants of the lower bound `delta ||Delta u||^2 + Pi(u) + c_delta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialBound {
    pub delta: f64,
    pub c_delta: f64,
}

pub fn potential_bound(op: &PlateOperator, kind: &Nonlinearity) -> Result<PotentialBound> {
    kind.validate(op)?;
    Ok(match *kind {
        Nonlinearity::Kirchhoff { cubic, linear } => {
            let area = match op.grid {
                PlateGrid::Interval { .. } => 2.0,
                PlateGrid::Rectangle { width, height, .. } => width * height,
            };
            if linear >= 0.0 {
                PotentialBound { delta: 0.0, c_delta: 0.0 }
            } else if cubic > 0.0 {
                PotentialBound { delta: 0.0, c_delta: area * linear * linear / (4.0 * cubic) }
            } else {
                let lambda1 = op.smallest_eigenvalue()?;
                PotentialBound { delta: -linear / (2.0 * lambda1) * (1.0 + 1e-12), c_delta: 0.0 }
            }
        }
        Nonlinearity::Berger { kappa, gamma } => {
            PotentialBound { delta: 0.0, c_delta: gamma.max(0.0).powi(2) / (4.0 * kappa) }
        }
        Nonlinearity::VonKarman { ref f0 } => {
            PotentialBound { delta: 0.0, c_delta: 0.25 * op.laplacian_norm_sq(f0) }
        }
    })
}

/// One point of a scaling-ray scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPoint {
    pub c: f64,
    pub value: f64,
}

/// Evaluates `delta ||Delta(cu)||^2 + Pi(cu) + c_delta` for `c` in
/// `[-c_max, c_max]`; returns the bound and the scan.
pub fn potential_bound_scan(
    op: &PlateOperator,
    u: &[f64],
    kind: &Nonlinearity,
    c_max: f64,
    samples: usize,
) -> Result<(PotentialBound, Vec<RayPoint>)> {
    let bound = potential_bound(op, kind)?;
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let c = -c_max + 2.0 * c_max * k as f64 / (samples - 1).max(1) as f64;
        let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
        let value = bound.delta * op.laplacian_norm_sq(&cu) + plate_potential(op, &cu, kind)? + bound.c_delta;
        out.push(RayPoint { c, value });
    }
    Ok((bound, out))
}

/// Displacement and velocity at the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateState {
    pub grid: PlateGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl PlateState {
    pub fn zeros(grid: PlateGrid) -> Self {
        Self { grid, u: vec![0.0; grid.dim()], v: vec![0.0; grid.dim()] }
    }

    pub fn new(grid: PlateGrid, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_len(&grid, &u)?;
        check_len(&grid, &v)?;
        Ok(Self { grid, u, v })
    }

    /// `u_x` by central differences with the clamped zeros at the ends
    /// (1D only).
    pub fn slope(&self) -> Vec<f64> {
        central_slope(&self.grid, &self.u)
    }
}

/// Central-difference `u_x` of interior samples on an interval.
pub fn central_slope(grid: &PlateGrid, u: &[f64]) -> Vec<f64> {
    let (h, _) = grid.spacing();
    let n = u.len();
    (0..n)
        .map(|k| {
            let right = if k + 1 < n { u[k + 1] } else { 0.0 };
            let left = if k > 0 { u[k - 1] } else { 0.0 };
            (right - left) / (2.0 * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beam_stencil_corner() {
        let g = PlateGrid::interval(8).unwrap();
        let h = 0.25f64;
        let a = g.stiffness();
        let get = |i, j| a.iter().find(|&(r, c, _)| r == i && c == j).map(|t| t.2).unwrap_or(0.0);
        let s = h.powi(3);
        assert!((get(0, 0) * s - 7.0).abs() < 1e-12);
        assert!((get(3, 3) * s - 6.0).abs() < 1e-12);
        assert!((get(3, 2) * s + 4.0).abs() < 1e-12);
        assert!((get(3, 1) * s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let g = PlateGrid::rectangle(6, 6, 1.0, 1.0).unwrap();
        let z = vec![0.0; g.dim()];
        assert!(biharmonic_apply(&g, &z).unwrap().iter().all(|v| *v == 0.0));
        let op = PlateOperator::new(g).unwrap();
        assert!(airy_solve(&op, &z).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn bracket_constant_cases() {
        let g = PlateGrid::rectangle(8, 8, 1.0, 1.0).unwrap();
        let (h, _) = g.spacing();
        let full = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
            let mut out = Vec::new();
            for j in 0..=8 {
                for i in 0..=8 {
                    out.push(f(i as f64 * h, j as f64 * h));
                }
            }
            out
        };
        let xy = full(&|x, y| x * y);
        let b = vk_bracket(&g, &xy, &xy).unwrap();
        assert!(b.iter().all(|v| (v + 2.0).abs() < 1e-9));
        let b = vk_bracket(&g, &full(&|x, _| x * x), &full(&|_, y| y * y)).unwrap();
        assert!(b.iter().all(|v| (v - 4.0).abs() < 1e-9));
        assert!(vk_bracket(&PlateGrid::interval(8).unwrap(), &[0.0; 9], &[0.0; 9]).is_err());
    }

    #[test]
    fn berger_force_vanishes_on_critical_sphere() {
        let op = PlateOperator::new(PlateGrid::interval(32).unwrap()).unwrap();
        let mut u = op.grid.sample(|x, _| (1.0 - x * x).powi(2));
        let g = op.gradient_norm_sq(&u);
        let kind = Nonlinearity::Berger { kappa: 2.0, gamma: 3.0 };
        let s = (1.5 / g).sqrt();
        u.iter_mut().for_each(|v| *v *= s);
        let f = plate_force(&op, &u, &kind).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn kirchhoff_cube() {
        let op = PlateOperator::new(PlateGrid::interval(16).unwrap()).unwrap();
        let u = op.grid.sample(|x, _| 1.0 - x * x);
        let kind = Nonlinearity::Kirchhoff { cubic: 1.0, linear: 0.0 };
        let f = plate_force(&op, &u, &kind).unwrap();
        for (a, b) in f.iter().zip(&u) {
            assert_eq!(*a, b * b * b);
        }
        let p = plate_potential(&op, &u, &kind).unwrap();
        let q: f64 = u.iter().map(|s| s.powi(4)).sum::<f64>() * op.cell() / 4.0;
        assert!((p - q).abs() < 1e-15);
        assert!(kind.growth_warnings(31.0).is_empty());
        assert_eq!(Nonlinearity::Kirchhoff { cubic: -1.0, linear: 0.0 }.growth_warnings(31.0).len(), 1);
    }

    #[test]
    fn von_karman_at_zero() {
        let g = PlateGrid::rectangle(8, 8, 1.0, 1.0).unwrap();
        let op = PlateOperator::new(g).unwrap();
        let f0 = g.sample(|x, y| x * y);
        let kind = Nonlinearity::VonKarman { f0 };
        let f = plate_force(&op, &vec![0.0; g.dim()], &kind).unwrap();
        assert!(f.iter().all(|v| *v == 0.0));
    }
}
