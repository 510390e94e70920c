//! Sparse symmetric LDLᵀ factorization.
//!
//! The pattern is analysed once (minimum-degree ordering, elimination tree,
//! column counts); values are refilled and refactored every sweep. The
//! up-looking numeric phase follows the classic LDL algorithm of Davis.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

const NONE: usize = usize::MAX;

/// Ordering, permuted upper-triangular pattern, and elimination tree of a
/// symmetric sparsity pattern.
#[derive(Debug)]
pub struct SymbolicLdl {
    n: usize,
    /// new position -> original index
    perm: Vec<usize>,
    /// original index -> new position
    iperm: Vec<usize>,
    /// CSC of the upper triangle (row <= col) in permuted coordinates.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    parent: Vec<usize>,
    /// column pointers of L
    l_ptr: Vec<usize>,
}

impl SymbolicLdl {
    /// Analyses the pattern given by off-diagonal `edges` (original
    /// indices, either orientation, duplicates allowed). The diagonal is
    /// always part of the pattern.
    pub fn analyze(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Contract(format!(
                    "edge ({i}, {j}) outside a {n}-dimensional pattern"
                )));
            }
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
        let perm = minimum_degree(adj.clone());
        Ok(Self::with_ordering(n, &adj, perm))
    }

    fn with_ordering(n: usize, adj: &[HashSet<usize>], perm: Vec<usize>) -> Self {
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (old_i, nbrs) in adj.iter().enumerate() {
            let i = iperm[old_i];
            for &old_j in nbrs {
                let j = iperm[old_j];
                if i < j {
                    cols[j].push(i);
                }
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for (k, col) in cols.iter_mut().enumerate() {
            col.push(k);
            col.sort_unstable();
            row_idx.extend_from_slice(col);
            col_ptr.push(row_idx.len());
        }

        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &row in &row_idx[col_ptr[k]..col_ptr[k + 1]] {
                let mut i = row;
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut l_ptr = Vec::with_capacity(n + 1);
        l_ptr.push(0);
        for k in 0..n {
            l_ptr.push(l_ptr[k] + lnz[k]);
        }
        Self {
            n,
            perm,
            iperm,
            col_ptr,
            row_idx,
            parent,
            l_ptr,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the upper triangle of the matrix, diagonal included.
    pub fn matrix_nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Strictly-lower entries of `L` after fill-in.
    pub fn factor_nnz(&self) -> usize {
        self.l_ptr[self.n]
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.iperm[i], self.iperm[j]);
        let (r, c) = if a <= b { (a, b) } else { (b, a) };
        let col = &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]];
        col.binary_search(&r).ok().map(|p| self.col_ptr[c] + p)
    }
}

/// Greedy minimum-degree ordering on an explicit elimination graph.
/// Ties go to the smallest index so the result is deterministic.
fn minimum_degree(mut adj: Vec<HashSet<usize>>) -> Vec<usize> {
    let n = adj.len();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&i| !eliminated[i])
            .min_by_key(|&i| (adj[i].len(), i))
            .expect("uneliminated vertex remains");
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &u in &nbrs {
            adj[u].remove(&v);
            for &w in &nbrs {
                if w != u {
                    adj[u].insert(w);
                }
            }
        }
        adj[v].clear();
        eliminated[v] = true;
        order.push(v);
    }
    order
}

/// Symmetric matrix with values on a fixed [`SymbolicLdl`] pattern.
#[derive(Clone, Debug)]
pub struct SparseSymmetric<T> {
    symbolic: Arc<SymbolicLdl>,
    values: Vec<T>,
}

impl<T: Real> SparseSymmetric<T> {
    pub fn new(symbolic: Arc<SymbolicLdl>) -> Self {
        let nnz = symbolic.matrix_nnz();
        Self {
            symbolic,
            values: vec![T::zero(); nnz],
        }
    }

    pub fn dim(&self) -> usize {
        self.symbolic.n
    }

    pub fn symbolic(&self) -> &Arc<SymbolicLdl> {
        &self.symbolic
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = T::zero());
    }

    /// Adds `v` to entry `(i, j)` and, for `i != j`, its mirror `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: T) -> Result<()> {
        match self.symbolic.slot(i, j) {
            Some(p) => {
                self.values[p] += v;
                Ok(())
            }
            None => Err(Error::Contract(format!(
                "entry ({i}, {j}) is not in the analysed pattern"
            ))),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.symbolic
            .slot(i, j)
            .map_or(T::zero(), |p| self.values[p])
    }

    /// Numeric LDLᵀ. Fails with the offending (original) index when a
    /// pivot is not strictly positive.
    pub fn factor(&self) -> Result<LdlFactor<T>> {
        let s = &*self.symbolic;
        let n = s.n;
        let lsize = s.l_ptr[n];
        let mut li = vec![0usize; lsize];
        let mut lx = vec![T::zero(); lsize];
        let mut d = vec![T::zero(); n];
        let mut y = vec![T::zero(); n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];

        for k in 0..n {
            y[k] = T::zero();
            let mut top = n;
            flag[k] = k;
            for p in s.col_ptr[k]..s.col_ptr[k + 1] {
                let mut i = s.row_idx[p];
                y[i] += self.values[p];
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = s.parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = T::zero();
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = T::zero();
                let p2 = s.l_ptr[i] + lnz[i];
                for p in s.l_ptr[i]..p2 {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[p2] = k;
                lx[p2] = l_ki;
                lnz[i] += 1;
            }
            if !(d[k] > T::zero()) || !d[k].is_finite() {
                return Err(Error::Numerical(format!(
                    "non-positive pivot {} at index {}",
                    d[k], s.perm[k]
                )));
            }
        }
        Ok(LdlFactor {
            symbolic: Arc::clone(&self.symbolic),
            li,
            lx,
            d,
        })
    }

    /// Dense copy, for tests and diagnostics.
    pub fn to_dense(&self) -> crate::linalg::Matrix<T> {
        let n = self.dim();
        crate::linalg::Matrix::from_fn(n, n, |i, j| self.get(i, j))
    }
}

/// Numeric factor `P A Pᵀ = L D Lᵀ`.
#[derive(Clone, Debug)]
pub struct LdlFactor<T> {
    symbolic: Arc<SymbolicLdl>,
    li: Vec<usize>,
    lx: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> LdlFactor<T> {
    fn lsolve(&self, x: &mut [T]) {
        let lp = &self.symbolic.l_ptr;
        for j in 0..self.d.len() {
            let xj = x[j];
            for p in lp[j]..lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
    }

    fn ltsolve(&self, x: &mut [T]) {
        let lp = &self.symbolic.l_ptr;
        for j in (0..self.d.len()).rev() {
            let mut xj = x[j];
            for p in lp[j]..lp[j + 1] {
                xj -= self.lx[p] * x[self.li[p]];
            }
            x[j] = xj;
        }
    }

    fn permute(&self, b: &[T]) -> Vec<T> {
        self.symbolic.perm.iter().map(|&old| b[old]).collect()
    }

    fn unpermute(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); x.len()];
        for (new, &old) in self.symbolic.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = self.permute(b);
        self.lsolve(&mut x);
        for (xi, &di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        self.ltsolve(&mut x);
        self.unpermute(&x)
    }

    /// Draws from `N(A⁻¹ h, A⁻¹)` given i.i.d. standard normal `z`.
    pub fn sample_gaussian(&self, h: &[T], z: &[T]) -> Vec<T> {
        let mut x = self.permute(h);
        self.lsolve(&mut x);
        for ((xi, &di), &zi) in x.iter_mut().zip(&self.d).zip(z) {
            *xi = *xi / di + zi / di.sqrt();
        }
        self.ltsolve(&mut x);
        self.unpermute(&x)
    }

    pub fn log_det(&self) -> T {
        self.d.iter().map(|d| d.ln()).sum()
    }
}
