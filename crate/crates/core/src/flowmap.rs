//! Flow operator on the truncated half-plane `[-L_x, L_x) x [0, L_z]`, the
//! Zaremba problem, the Neumann-flow map and its adjoint.
//!
//! Nodes sit at `x_i = -L_x + i h_x` (periodic in `x`) and `z_j = j h_z`,
//! `j = 0..=n_z`. The lumped mass `W` uses trapezoid weights in `z`; the
//! Dirichlet form `K` uses forward differences, so `phi^T K phi` is the
//! discrete `||grad phi||^2` and `W^{-1} K` is the five-point Laplacian in the
//! interior. The Neumann condition on `z = 0` is imposed weakly:
//! `W Delta_h phi = -K phi - B^T M_b g` with `g = d_z phi` on `Omega` and
//! `M_b = h_x`. The acceleration potential `psi` has no unknowns at the
//! `z = 0` nodes with `|x| >= 1`, where it vanishes identically. The top
//! boundary is natural (homogeneous Neumann).

use std::io::Write;

use crate::error::{Error, Result};
use crate::sparse::{dot, Csr, Factorization, Triplets};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlaneGrid {
    pub half_length: f64,
    pub depth: f64,
    /// Nodes per row (periodic).
    pub nx: usize,
    /// Cells in `z`; rows are `0..=nz`.
    pub nz: usize,
}

impl HalfPlaneGrid {
    /// Grid with spacings `hx`, `hz`; `1/hx` must be an integer so that
    /// `x = +-1` are nodes.
    pub fn new(half_length: f64, depth: f64, hx: f64, hz: f64) -> Result<Self> {
        if !(hx > 0.0 && hz > 0.0) {
            return Err(Error::InvalidInput("grid spacings must be positive".into()));
        }
        let per_unit = 1.0 / hx;
        if (per_unit - per_unit.round()).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("1/h_x = {per_unit} must be an integer")));
        }
        if !(half_length >= 2.0) {
            return Err(Error::InvalidInput(format!("L_x = {half_length} leaves no margin around Omega")));
        }
        let nx = 2.0 * half_length / hx;
        let nz = depth / hz;
        if (nx - nx.round()).abs() > 1e-9 || (nz - nz.round()).abs() > 1e-9 || nz.round() < 3.0 {
            return Err(Error::InvalidInput("L_x/h_x and L_z/h_z must be integers, L_z/h_z >= 3".into()));
        }
        Ok(Self { half_length, depth, nx: nx.round() as usize, nz: nz.round() as usize })
    }

    pub fn uniform(half_length: f64, depth: f64, h: f64) -> Result<Self> {
        Self::new(half_length, depth, h, h)
    }

    pub fn hx(&self) -> f64 {
        2.0 * self.half_length / self.nx as f64
    }

    pub fn hz(&self) -> f64 {
        self.depth / self.nz as f64
    }

    pub fn rows(&self) -> usize {
        self.nz + 1
    }

    pub fn nodes(&self) -> usize {
        self.nx * self.rows()
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.hx()
    }

    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.hz()
    }

    pub fn refined(&self) -> Self {
        Self { half_length: self.half_length, depth: self.depth, nx: 2 * self.nx, nz: 2 * self.nz }
    }

    /// Plate cells on `Omega` matching the `x` spacing.
    pub fn plate_cells(&self) -> usize {
        (2.0 / self.hx()).round() as usize
    }

    /// Column indices `i` of the `z = 0` nodes inside `Omega`, left to right.
    pub fn omega_columns(&self) -> Vec<usize> {
        let first = ((self.half_length - 1.0) / self.hx()).round() as usize + 1;
        (first..first + self.plate_cells() - 1).collect()
    }

    /// True where `psi` is pinned to zero: `z = 0` and `|x| >= 1`.
    pub fn is_kutta(&self, i: usize, j: usize) -> bool {
        j == 0 && self.x(i).abs() >= 1.0 - 1e-12
    }

    /// Lumped mass of each node.
    pub fn weights(&self) -> Vec<f64> {
        let cell = self.hx() * self.hz();
        let mut w = vec![cell; self.nodes()];
        for i in 0..self.nx {
            w[self.node(i, 0)] *= 0.5;
            w[self.node(i, self.nz)] *= 0.5;
        }
        w
    }

    /// `phi^T K phi = sx int phi_x^2 + sz int phi_z^2` (forward differences).
    pub fn dirichlet_form(&self, sx: f64, sz: f64) -> Triplets {
        let n = self.nodes();
        let (hx, hz) = (self.hx(), self.hz());
        let mut k = Triplets::new(n, n);
        let mut edge = |a: usize, b: usize, c: f64| {
            k.add(a, a, c);
            k.add(b, b, c);
            k.add(a, b, -c);
            k.add(b, a, -c);
        };
        for j in 0..self.rows() {
            let wz = if j == 0 || j == self.nz { 0.5 } else { 1.0 };
            for i in 0..self.nx {
                edge(self.node(i, j), self.node((i + 1) % self.nx, j), sx * wz * hz / hx);
            }
        }
        for j in 0..self.nz {
            for i in 0..self.nx {
                edge(self.node(i, j), self.node(i, j + 1), sz * hx / hz);
            }
        }
        k
    }

    /// Central periodic `d/dx`.
    pub fn x_difference(&self) -> Triplets {
        let n = self.nodes();
        let c = 0.5 / self.hx();
        let mut d = Triplets::new(n, n);
        for j in 0..self.rows() {
            for i in 0..self.nx {
                d.add(self.node(i, j), self.node((i + 1) % self.nx, j), c);
                d.add(self.node(i, j), self.node((i + self.nx - 1) % self.nx, j), -c);
            }
        }
        d
    }
}

/// Potential and acceleration potential at every node; `psi` is exactly zero
/// at the Kutta-Joukowski nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub grid: HalfPlaneGrid,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl FlowField {
    pub fn zeros(grid: HalfPlaneGrid) -> Self {
        Self { grid, phi: vec![0.0; grid.nodes()], psi: vec![0.0; grid.nodes()] }
    }

    pub fn new(grid: HalfPlaneGrid, phi: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if phi.len() != grid.nodes() || psi.len() != grid.nodes() {
            return Err(Error::Incompatible("field size does not match grid".into()));
        }
        if let Some(k) = phi.iter().chain(&psi).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        let f = Self { grid, phi, psi };
        if f.kutta_defect() != 0.0 {
            return Err(Error::InvalidInput("psi must vanish on z = 0 off Omega".into()));
        }
        Ok(f)
    }

    /// Samples `phi(x, z)`, `psi(x, z)`; `psi` is zeroed at the pinned nodes.
    pub fn from_fn(grid: HalfPlaneGrid, phi: impl Fn(f64, f64) -> f64, psi: impl Fn(f64, f64) -> f64) -> Self {
        let mut f = Self::zeros(grid);
        for j in 0..grid.rows() {
            for i in 0..grid.nx {
                let (x, z) = (grid.x(i), grid.z(j));
                let k = grid.node(i, j);
                f.phi[k] = phi(x, z);
                f.psi[k] = if grid.is_kutta(i, j) { 0.0 } else { psi(x, z) };
            }
        }
        f
    }

    /// Largest `|psi|` on the pinned nodes.
    pub fn kutta_defect(&self) -> f64 {
        let g = &self.grid;
        (0..g.nx).filter(|&i| g.is_kutta(i, 0)).map(|i| self.psi[g.node(i, 0)].abs()).fold(0.0, f64::max)
    }

    /// `gamma[psi]` on the `Omega` nodes.
    pub fn trace_psi(&self) -> Vec<f64> {
        self.grid.omega_columns().iter().map(|&i| self.psi[self.grid.node(i, 0)]).collect()
    }

    /// Flat binary snapshot: `nx`, `rows` as u64 LE, `h_x`, `h_z`, `x_0` as
    /// f64 LE, then `phi` and `psi` row-major (`z` rows of `x` samples).
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let g = &self.grid;
        w.write_all(&(g.nx as u64).to_le_bytes())?;
        w.write_all(&(g.rows() as u64).to_le_bytes())?;
        for v in [g.hx(), g.hz(), -g.half_length] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in self.phi.iter().chain(&self.psi) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// CSV slice at `z = 0`: `x,phi,psi`.
    pub fn write_surface_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,phi,psi")?;
        for i in 0..self.grid.nx {
            let k = self.grid.node(i, 0);
            writeln!(w, "{:.12e},{:.12e},{:.12e}", self.grid.x(i), self.phi[k], self.psi[k])?;
        }
        Ok(())
    }
}

/// Discrete flow operators at one grid and flow speed.
#[derive(Debug)]
pub struct FlowSystem {
    pub grid: HalfPlaneGrid,
    pub u: f64,
    /// Node of each `psi` unknown.
    pub psi_nodes: Vec<usize>,
    /// `psi` unknown of each node.
    pub psi_index: Vec<Option<usize>>,
    /// Node ids of `Omega` at `z = 0`.
    pub omega_nodes: Vec<usize>,
    pub weights: Vec<f64>,
    pub k: Triplets,
    pub dx: Triplets,
    k_csr: Csr,
    dx_csr: Csr,
}

impl FlowSystem {
    pub fn new(grid: HalfPlaneGrid, u: f64) -> Result<Self> {
        check_speed(u)?;
        let mut psi_nodes = Vec::new();
        let mut psi_index = vec![None; grid.nodes()];
        for j in 0..grid.rows() {
            for i in 0..grid.nx {
                if !grid.is_kutta(i, j) {
                    psi_index[grid.node(i, j)] = Some(psi_nodes.len());
                    psi_nodes.push(grid.node(i, j));
                }
            }
        }
        let omega_nodes = grid.omega_columns().iter().map(|&i| grid.node(i, 0)).collect();
        let k = grid.dirichlet_form(1.0, 1.0);
        let dx = grid.x_difference();
        Ok(Self {
            grid,
            u,
            psi_nodes,
            psi_index,
            omega_nodes,
            weights: grid.weights(),
            k_csr: k.to_csr(),
            dx_csr: dx.to_csr(),
            k,
            dx,
        })
    }

    pub fn n_phi(&self) -> usize {
        self.grid.nodes()
    }

    pub fn n_psi(&self) -> usize {
        self.psi_nodes.len()
    }

    pub fn n_flow(&self) -> usize {
        self.n_phi() + self.n_psi()
    }

    /// Boundary mass over node mass at the `Omega` nodes, `M_b / W = 2/h_z`.
    pub fn trace_gain(&self) -> f64 {
        2.0 / self.grid.hz()
    }

    /// Flow block of the generator with homogeneous Neumann data, acting on
    /// `[phi; psi_unknowns]`: `(-U phi_x + psi, -U psi_x + Delta_h phi)`.
    pub fn generator(&self) -> Triplets {
        let (np, nf) = (self.n_phi(), self.n_flow());
        let mut a = Triplets::new(nf, nf);
        for (r, c, v) in self.dx.iter() {
            a.add(r, c, -self.u * v);
            if let (Some(pr), Some(pc)) = (self.psi_index[r], self.psi_index[c]) {
                a.add(np + pr, np + pc, -self.u * v);
            }
        }
        for (p, &node) in self.psi_nodes.iter().enumerate() {
            a.add(node, np + p, 1.0);
        }
        for (r, c, v) in self.k.iter() {
            if let Some(pr) = self.psi_index[r] {
                a.add(np + pr, c, -v / self.weights[r]);
            }
        }
        a
    }

    /// Packs a field into `[phi; psi_unknowns]`.
    pub fn pack(&self, f: &FlowField) -> Vec<f64> {
        let mut y = f.phi.clone();
        y.extend(self.psi_nodes.iter().map(|&n| f.psi[n]));
        y
    }

    pub fn unpack(&self, y: &[f64]) -> FlowField {
        let mut f = FlowField::zeros(self.grid);
        f.phi.copy_from_slice(&y[..self.n_phi()]);
        for (p, &node) in self.psi_nodes.iter().enumerate() {
            f.psi[node] = y[self.n_phi() + p];
        }
        f
    }

    /// `||grad phi||^2 + ||psi||^2` of a packed flow vector.
    pub fn energy_norm_sq(&self, y: &[f64]) -> f64 {
        let np = self.n_phi();
        let phi = &y[..np];
        let kphi = self.k_csr.apply(phi);
        let psi_part: f64 =
            self.psi_nodes.iter().enumerate().map(|(p, &n)| self.weights[n] * y[np + p] * y[np + p]).sum();
        dot(phi, &kphi) + psi_part
    }

    /// `G y`: `(K phi, W psi)` on a packed flow vector.
    pub fn gram_apply(&self, y: &[f64]) -> Vec<f64> {
        let np = self.n_phi();
        let mut out = self.k_csr.apply(&y[..np]);
        out.extend(self.psi_nodes.iter().enumerate().map(|(p, &n)| self.weights[n] * y[np + p]));
        out
    }

    pub fn k_apply(&self, phi: &[f64]) -> Vec<f64> {
        self.k_csr.apply(phi)
    }

    pub fn dx_apply(&self, f: &[f64]) -> Vec<f64> {
        self.dx_csr.apply(f)
    }
}

fn check_speed(u: f64) -> Result<()> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidInput(format!("U must lie in [0,1), got {u}")));
    }
    Ok(())
}

/// Strong-form `(-U phi_x + psi, -U psi_x + Delta phi)` with centered
/// differences; the `z` second derivative on the bottom and top rows uses
/// the one-sided stencil `(2f_0 - 5f_1 + 4f_2 - f_3)/h^2`. The second
/// component is returned only at nodes carrying a `psi` unknown.
pub fn apply_a0(field: &FlowField, u: f64) -> Result<FlowField> {
    check_speed(u)?;
    let g = field.grid;
    let (hx, hz) = (g.hx(), g.hz());
    let (nx, nz) = (g.nx, g.nz);
    let at = |f: &[f64], i: usize, j: usize| f[g.node(i % nx, j)];
    let dxc = |f: &[f64], i: usize, j: usize| (at(f, i + 1, j) - at(f, i + nx - 1, j)) / (2.0 * hx);
    let lap = |f: &[f64], i: usize, j: usize| {
        let fxx = (at(f, i + 1, j) - 2.0 * at(f, i, j) + at(f, i + nx - 1, j)) / (hx * hx);
        let fzz = if j == 0 {
            (2.0 * at(f, i, 0) - 5.0 * at(f, i, 1) + 4.0 * at(f, i, 2) - at(f, i, 3)) / (hz * hz)
        } else if j == nz {
            (2.0 * at(f, i, nz) - 5.0 * at(f, i, nz - 1) + 4.0 * at(f, i, nz - 2) - at(f, i, nz - 3)) / (hz * hz)
        } else {
            (at(f, i, j + 1) - 2.0 * at(f, i, j) + at(f, i, j - 1)) / (hz * hz)
        };
        fxx + fzz
    };
    let mut out = FlowField::zeros(g);
    for j in 0..=nz {
        for i in 0..nx {
            let k = g.node(i, j);
            out.phi[k] = -u * dxc(&field.phi, i, j) + field.psi[k];
            if !g.is_kutta(i, j) {
                out.psi[k] = -u * dxc(&field.psi, i, j) + lap(&field.phi, i, j);
            }
        }
    }
    Ok(out)
}

/// Solution of the Zaremba problem with its algebraic residual.
#[derive(Debug, Clone)]
pub struct ZarembaSolution {
    pub w: Vec<f64>,
    pub residual: f64,
}

/// Solves `Delta_U w = f` (`Delta_U = Delta - U^2 d_xx`) with
/// `d_nu w = g_n` on `Omega`, `w = g_d` on `z = 0` off `Omega` (values at the
/// pinned columns, left to right) and homogeneous Neumann on the top.
pub fn solve_zaremba(
    grid: &HalfPlaneGrid,
    f: &[f64],
    g_n: &[f64],
    g_d: &[f64],
    u: f64,
) -> Result<ZarembaSolution> {
    check_speed(u)?;
    let n = grid.nodes();
    let omega = grid.omega_columns();
    let pinned: Vec<usize> = (0..grid.nx).filter(|&i| grid.is_kutta(i, 0)).collect();
    if f.len() != n || g_n.len() != omega.len() || g_d.len() != pinned.len() {
        return Err(Error::Incompatible("Zaremba data sizes do not match the grid".into()));
    }
    if let Some(k) = f.iter().chain(g_n).chain(g_d).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    let k = grid.dirichlet_form(1.0 - u * u, 1.0);
    let w = grid.weights();
    let mut fixed = vec![None; n];
    for (&i, &v) in pinned.iter().zip(g_d) {
        fixed[grid.node(i, 0)] = Some(v);
    }
    let mut free_index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for node in 0..n {
        if fixed[node].is_none() {
            free_index[node] = free.len();
            free.push(node);
        }
    }
    let mut rhs: Vec<f64> = free.iter().map(|&node| -w[node] * f[node]).collect();
    for (&i, &g) in omega.iter().zip(g_n) {
        rhs[free_index[grid.node(i, 0)]] += grid.hx() * g;
    }
    let mut a = Triplets::new(free.len(), free.len());
    for (r, c, v) in k.iter() {
        if fixed[r].is_some() {
            continue;
        }
        match fixed[c] {
            Some(val) => rhs[free_index[r]] -= v * val,
            None => a.add(free_index[r], free_index[c], v),
        }
    }
    let sol = a.factor()?.solve(&rhs)?;
    let ax = a.to_csr().apply(&sol);
    let scale = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let residual = ax.iter().zip(&rhs).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt() / scale;
    let mut out = vec![0.0; n];
    for node in 0..n {
        out[node] = match fixed[node] {
            Some(v) => v,
            None => sol[free_index[node]],
        };
    }
    if residual > 1e-8 {
        return Err(Error::NoConvergence { what: "Zaremba solve".into(), residual });
    }
    Ok(ZarembaSolution { w: out, residual })
}

/// Factored `(A0_h + I)` with the Neumann-data input map.
#[derive(Debug)]
pub struct NeumannFlowMap {
    pub system: FlowSystem,
    factor: Factorization,
    shifted: Csr,
}

impl NeumannFlowMap {
    pub fn new(grid: HalfPlaneGrid, u: f64) -> Result<Self> {
        let system = FlowSystem::new(grid, u)?;
        let mut m = system.generator();
        for d in 0..system.n_flow() {
            m.add(d, d, 1.0);
        }
        Ok(Self { factor: m.factor()?, shifted: m.to_csr(), system })
    }

    fn input(&self, g: &[f64]) -> Vec<f64> {
        let s = &self.system;
        let mut rhs = vec![0.0; s.n_flow()];
        for (&node, gv) in s.omega_nodes.iter().zip(g) {
            let p = s.psi_index[node].expect("Omega nodes carry psi");
            rhs[s.n_phi() + p] = s.trace_gain() * gv;
        }
        rhs
    }

    /// `(phi, psi) = N g`: `-U phi_x + psi + phi = 0`,
    /// `-U psi_x + Delta phi + psi = 0`, `d_z phi = g` on `Omega`.
    /// Returns the field and the relative residual of the discrete system.
    pub fn apply(&self, g: &[f64]) -> Result<(FlowField, f64)> {
        self.check(g)?;
        let rhs = self.input(g);
        let y = self.factor.solve(&rhs)?;
        let r = self.shifted.apply(&y);
        let num = r.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok((self.system.unpack(&y), if den == 0.0 { num } else { num / den }))
    }

    /// Adjoint with respect to `((.,.))` on the flow space and `h_x`-weighted
    /// `l_2(Omega)`: `<N^* z, g>_Omega = ((z, N g))`.
    pub fn adjoint(&self, z: &FlowField) -> Result<Vec<f64>> {
        let s = &self.system;
        let gz = s.gram_apply(&s.pack(z));
        let w = self.factor.solve_transpose(&gz)?;
        Ok(s.omega_nodes
            .iter()
            .map(|&node| {
                let p = s.psi_index[node].expect("Omega nodes carry psi");
                w[s.n_phi() + p] / s.weights[node]
            })
            .collect())
    }

    fn check(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.system.omega_nodes.len() {
            return Err(Error::Incompatible("Neumann data length differs from Omega nodes".into()));
        }
        if let Some(k) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(())
    }
}

/// `neumann_flow_map` without a cached factorization.
pub fn neumann_flow_map(grid: &HalfPlaneGrid, g: &[f64], u: f64) -> Result<(FlowField, f64)> {
    NeumannFlowMap::new(*grid, u)?.apply(g)
}

/// Both sides of `<N^*[A0^* + I](phi, psi), g> = <gamma[psi], g>`, with
/// `A0^* = -A0` applied in strong form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityResidual {
    /// `|<N^* z - gamma[psi], g>_Omega|`.
    pub pairing: f64,
    /// `||N^* z - gamma[psi]||_{L_2(Omega)}`.
    pub trace_mismatch: f64,
}

pub fn check_duality_identity(map: &NeumannFlowMap, field: &FlowField, g: &[f64]) -> Result<DualityResidual> {
    map.check(g)?;
    if field.grid != map.system.grid {
        return Err(Error::Incompatible("field grid differs from the flow map grid".into()));
    }
    let a = apply_a0(field, map.system.u)?;
    let mut z = FlowField::zeros(field.grid);
    for k in 0..z.phi.len() {
        z.phi[k] = field.phi[k] - a.phi[k];
        z.psi[k] = field.psi[k] - a.psi[k];
    }
    let lhs = map.adjoint(&z)?;
    let trace = field.trace_psi();
    let hx = field.grid.hx();
    let diff: Vec<f64> = lhs.iter().zip(&trace).map(|(a, b)| a - b).collect();
    Ok(DualityResidual {
        pairing: hx * dot(&diff, g).abs(),
        trace_mismatch: (hx * dot(&diff, &diff)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> HalfPlaneGrid {
        HalfPlaneGrid::uniform(3.0, 2.0, 0.25).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(HalfPlaneGrid::uniform(1.5, 2.0, 0.25).is_err());
        assert!(HalfPlaneGrid::uniform(3.0, 2.0, 0.3).is_err());
        let g = grid();
        assert_eq!(g.nx, 24);
        assert_eq!(g.omega_columns().len(), 7);
        assert!(g.is_kutta(g.omega_columns()[0] - 1, 0));
        assert!(!g.is_kutta(g.omega_columns()[0], 0));
    }

    #[test]
    fn zero_in_zero_out() {
        let g = grid();
        let z = FlowField::zeros(g);
        let a = apply_a0(&z, 0.5).unwrap();
        assert!(a.phi.iter().chain(&a.psi).all(|v| *v == 0.0));
        let map = NeumannFlowMap::new(g, 0.5).unwrap();
        let (f, _) = map.apply(&vec![0.0; 7]).unwrap();
        assert!(f.phi.iter().chain(&f.psi).all(|v| *v == 0.0));
        let d = check_duality_identity(&map, &z, &vec![1.0; 7]).unwrap();
        assert_eq!(d.pairing, 0.0);
    }

    #[test]
    fn harmonic_quadratic_is_exact() {
        let g = grid();
        let f = FlowField::from_fn(g, |x, z| x * x - z * z, |_, _| 0.0);
        let a = apply_a0(&f, 0.0).unwrap();
        for j in 0..g.rows() {
            for i in 1..g.nx - 1 {
                assert!(a.psi[g.node(i, j)].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_supersonic() {
        assert!(FlowSystem::new(grid(), 1.0).is_err());
        let e = solve_zaremba(&grid(), &[], &[], &[], 1.2).unwrap_err();
        assert!(format!("{e}").contains("U must lie in [0,1)"));
    }

    #[test]
    fn zaremba_homogeneous_is_zero() {
        let g = grid();
        let pinned = (0..g.nx).filter(|&i| g.is_kutta(i, 0)).count();
        let s = solve_zaremba(&g, &vec![0.0; g.nodes()], &[0.0; 7], &vec![0.0; pinned], 0.5).unwrap();
        assert!(s.w.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn snapshot_layout() {
        let g = grid();
        let f = FlowField::from_fn(g, |x, _| x, |_, z| z);
        let mut buf = Vec::new();
        f.write_snapshot(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 24 + 16 * g.nodes());
        assert_eq!(u64::from_le_bytes(buf[..8].try_into().unwrap()), g.nx as u64);
    }
}
