//! Sparse assembly and factorization helpers over faer.

use std::collections::BTreeMap;

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::SparseColMat;
use faer::Mat;

use crate::error::{Error, Result};

/// Coordinate-format builder; duplicate entries are summed.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl Triplets {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: BTreeMap::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        if v != 0.0 {
            *self.entries.entry((i, j)).or_insert(0.0) += v;
        }
    }

    /// Adds `scale * other`, shifted to block position `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, other: &Triplets, scale: f64) {
        for (&(i, j), &v) in &other.entries {
            self.add(r0 + i, c0 + j, scale * v);
        }
    }

    pub fn transpose(&self) -> Triplets {
        let mut t = Triplets::new(self.cols, self.rows);
        for (&(i, j), &v) in &self.entries {
            t.add(j, i, v);
        }
        t
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn to_csr(&self) -> Csr {
        let mut row_ptr = vec![0usize; self.rows + 1];
        for &(i, _) in self.entries.keys() {
            row_ptr[i + 1] += 1;
        }
        for i in 0..self.rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut col = Vec::with_capacity(self.nnz());
        let mut val = Vec::with_capacity(self.nnz());
        for (&(_, j), &v) in &self.entries {
            col.push(j);
            val.push(v);
        }
        Csr { rows: self.rows, cols: self.cols, row_ptr, col, val }
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<(usize, usize, f64)> = self.iter().collect();
        SparseColMat::try_new_from_triplets(self.rows, self.cols, &t)
            .map_err(|e| Error::Solver(format!("sparse assembly: {e:?}")))
    }

    pub fn factor(&self) -> Result<Factorization> {
        if self.rows != self.cols {
            return Err(Error::Solver("factorization needs a square matrix".into()));
        }
        let lu = self
            .to_faer()?
            .sp_lu()
            .map_err(|e| Error::Solver(format!("sparse LU: {e:?}")))?;
        Ok(Factorization { n: self.rows, lu })
    }
}

/// Compressed-row matrix for repeated products.
#[derive(Debug, Clone)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            *yi = s;
        }
    }
}

/// Sparse LU, solvable with the matrix or its transpose.
pub struct Factorization {
    n: usize,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("n", &self.n).finish()
    }
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.run(b, false)
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.run(b, true)
    }

    /// Solves for several right-hand sides at once.
    pub fn solve_many(&self, bs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if let Some(b) = bs.iter().find(|b| b.len() != self.n) {
            return Err(Error::Solver(format!("rhs length {} for dimension {}", b.len(), self.n)));
        }
        let rhs = Mat::<f64>::from_fn(self.n, bs.len(), |i, j| bs[j][i]);
        let x = self.lu.solve(&rhs);
        let out: Vec<Vec<f64>> = (0..bs.len()).map(|j| (0..self.n).map(|i| x.read(i, j)).collect()).collect();
        if out.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite solution from sparse LU".into()));
        }
        Ok(out)
    }

    fn run(&self, b: &[f64], transpose: bool) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Solver(format!("rhs length {} for dimension {}", b.len(), self.n)));
        }
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = if transpose { self.lu.solve_transpose(&rhs) } else { self.lu.solve(&rhs) };
        let out: Vec<f64> = (0..self.n).map(|i| x.read(i, 0)).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite solution from sparse LU".into()));
        }
        Ok(out)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_sum_and_solve() {
        let mut t = Triplets::new(2, 2);
        t.add(0, 0, 1.0);
        t.add(0, 0, 1.0);
        t.add(0, 1, 1.0);
        t.add(1, 1, 3.0);
        assert_eq!(t.nnz(), 3);
        let f = t.factor().unwrap();
        let x = f.solve(&[4.0, 6.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        let y = f.solve_transpose(&[2.0, 4.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-14 && (y[1] - 1.0).abs() < 1e-14);
        assert_eq!(t.to_csr().apply(&[1.0, 2.0]), vec![4.0, 6.0]);
        let many = f.solve_many(&[vec![4.0, 6.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(many[0], x);
        assert!((many[1][1] - 1.0).abs() < 1e-14);
    }
}
