//! Sparse symmetric matrices and the direct solvers used for Newton steps.
//!
//! Small systems go through a dense Cholesky factorization. Larger ones are
//! reordered with reverse Cuthill-McKee and factored in envelope (skyline)
//! form, which keeps the fill inside the profile of the reordered matrix.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Below this size the dense factorization is used.
pub const DENSE_CUTOFF: usize = 64;

/// Pivots below this fraction of the largest diagonal entry count as zero.
const PIVOT_TOL: f64 = 1e-13;

/// Symmetric `n x n` matrix stored as a diagonal plus per-row off-diagonal
/// lists (each off-diagonal entry is stored in both rows).
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    diag: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            diag: vec![0.0; n],
            rows: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.diag[i] += v;
    }

    /// Adds `v` to entries `(i, j)` and `(j, i)`, `i != j`.
    pub fn add_off(&mut self, i: usize, j: usize, v: f64) {
        assert_ne!(i, j, "diagonal entries go through add_diag");
        match self.rows[i].iter_mut().find(|(c, _)| *c == j) {
            Some(e) => e.1 += v,
            None => self.rows[i].push((j, v)),
        }
        match self.rows[j].iter_mut().find(|(c, _)| *c == i) {
            Some(e) => e.1 += v,
            None => self.rows[j].push((i, v)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.rows[i].iter().find(|(c, _)| *c == j).map_or(0.0, |e| e.1)
    }

    /// Off-diagonal entries of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.diag[i] * x[i] + self.rows[i].iter().map(|&(j, v)| v * x[j]).sum::<f64>())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mul_vec(&vec![1.0; self.dim()])
    }

    pub fn max_abs(&self) -> f64 {
        let d = self.diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        self.rows.iter().flatten().fold(d, |m, (_, v)| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn nnz_off(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = self.diag[i];
            for &(j, v) in &self.rows[i] {
                a[i * n + j] = v;
            }
        }
        a
    }

    /// Leading principal submatrix of size `m`.
    pub fn leading(&self, m: usize) -> SymMatrix {
        SymMatrix {
            diag: self.diag[..m].to_vec(),
            rows: self.rows[..m]
                .iter()
                .map(|r| r.iter().copied().filter(|&(j, _)| j < m).collect())
                .collect(),
        }
    }
}

/// Solves `a x = b` for symmetric positive definite `a`. Fails with
/// [`Error::SingularHessian`] when a pivot collapses.
pub fn solve_spd(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(a.dim(), b.len(), "dimension mismatch");
    let mut x = if a.dim() < DENSE_CUTOFF {
        dense_cholesky_solve(&a.to_dense(), a.dim(), b)?
    } else {
        skyline_solve(a, b)?
    };
    // One round of iterative refinement.
    let r: Vec<f64> = a.mul_vec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
    let rn = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let bn = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if rn > 1e-12 * bn {
        let dx = if a.dim() < DENSE_CUTOFF {
            dense_cholesky_solve(&a.to_dense(), a.dim(), &r)?
        } else {
            skyline_solve(a, &r)?
        };
        x.iter_mut().zip(dx).for_each(|(xi, d)| *xi += d);
    }
    Ok(x)
}

/// Dense Cholesky `a = l l^T` followed by two triangular solves.
pub fn dense_cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Result<Vec<f64>> {
    let scale = (0..n).fold(0.0_f64, |m, i| m.max(a[i * n + i].abs()));
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > PIVOT_TOL * scale) {
            return Err(Error::SingularHessian);
        }
        let d = libm::sqrt(d);
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Ok(y)
}

/// Reverse Cuthill-McKee ordering of the adjacency graph of `a`.
pub fn rcm_order(a: &SymMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .expect("unvisited vertex");
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.row(v).iter().map(|&(j, _)| j).filter(|&j| !visited[j]).collect();
            nb.sort_by_key(|&j| (degree[j], j));
            for j in nb {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope Cholesky on the RCM-permuted matrix.
fn skyline_solve(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    let perm = rcm_order(a);
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    // first[i]: first column stored in row i of the lower triangle.
    let mut first: Vec<usize> = (0..n).collect();
    for (new, &old) in perm.iter().enumerate() {
        for &(j, _) in a.row(old) {
            let c = inv[j];
            if c < new {
                first[new] = first[new].min(c);
            }
        }
    }
    let mut start = vec![0usize; n + 1];
    for i in 0..n {
        start[i + 1] = start[i] + (i - first[i] + 1);
    }
    let mut env = vec![0.0; start[n]];
    let at = |i: usize, j: usize| start[i] + (j - first[i]);
    for (new, &old) in perm.iter().enumerate() {
        env[at(new, new)] = a.diag()[old];
        for &(j, v) in a.row(old) {
            let c = inv[j];
            if c < new {
                env[at(new, c)] += v;
            }
        }
    }
    let scale = a.diag().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in first[i]..i {
            let lo = first[i].max(first[j]);
            let mut s = env[at(i, j)];
            for k in lo..j {
                s -= env[at(i, k)] * env[at(j, k)];
            }
            env[at(i, j)] = s / env[at(j, j)];
        }
        let mut d = env[at(i, i)];
        for k in first[i]..i {
            d -= env[at(i, k)] * env[at(i, k)];
        }
        if !(d > PIVOT_TOL * scale) {
            return Err(Error::SingularHessian);
        }
        env[at(i, i)] = libm::sqrt(d);
    }
    let mut y: Vec<f64> = perm.iter().map(|&old| b[old]).collect();
    for i in 0..n {
        let mut s = y[i];
        for k in first[i]..i {
            s -= env[at(i, k)] * y[k];
        }
        y[i] = s / env[at(i, i)];
    }
    for i in (0..n).rev() {
        y[i] /= env[at(i, i)];
        let yi = y[i];
        for k in first[i]..i {
            y[k] -= env[at(i, k)] * yi;
        }
    }
    let mut x = vec![0.0; n];
    for (new, &old) in perm.iter().enumerate() {
        x[old] = y[new];
    }
    Ok(x)
}
