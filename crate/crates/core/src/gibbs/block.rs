use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{LdlFactor, Matrix, SparseSymmetric, SymbolicLdl};
use crate::model::PanelDataset;
use crate::nngp::{GpPrior, GpStructure};
use crate::scalar::Real;

/// Diagonal ridge added once when the posterior precision fails to factor.
pub const RIDGE: f64 = 1e-10;

/// Inputs to one joint draw of `[coef; spatial; temporal]`.
pub struct BlockInputs<'a, T> {
    /// observations entering the likelihood
    pub rows: &'a [usize],
    /// Pólya-Gamma weights, indexed by observation
    pub omega: &'a [T],
    /// `κ`, indexed by observation
    pub kappa: &'a [T],
    /// part of the linear predictor held fixed (the noises), by observation
    pub offset: &'a [T],
    pub coef_mean: &'a [T],
    pub coef_var: &'a [T],
    pub spatial: (&'a GpPrior<T>, T),
    pub temporal: (&'a GpPrior<T>, T),
}

/// Sparse posterior precision of the stacked coefficient and effect block.
///
/// Unknowns are ordered as `P` coefficients, `S` spatial effects, then `T`
/// temporal effects. The sparsity pattern covers every observation so it
/// can be analyzed once and reused whatever the at-risk subset.
#[derive(Clone, Debug)]
pub struct BlockSystem<T> {
    p: usize,
    s: usize,
    t: usize,
    matrix: SparseSymmetric<T>,
}

impl<T: Real> BlockSystem<T> {
    pub fn new(data: &PanelDataset<T>, spatial: &GpStructure<T>, temporal: &GpStructure<T>) -> Result<Self> {
        let (p, s, t) = (data.n_coef(), data.n_locations(), data.n_times());
        if spatial.len() != s || temporal.len() != t {
            return Err(Error::Contract("process sizes do not match the data".into()));
        }
        let k = p + s + t;
        let mut edges = Vec::new();
        for i in 0..p {
            edges.extend((i + 1..k).map(|j| (i, j)));
        }
        edges.extend(spatial.precision_pattern().into_iter().map(|(a, b)| (p + a, p + b)));
        edges.extend(temporal.precision_pattern().into_iter().map(|(a, b)| (p + s + a, p + s + b)));
        let cells = data.cell_sizes();
        for (si, row) in cells.iter().enumerate() {
            for (ti, &n) in row.iter().enumerate() {
                if n > 0 {
                    edges.push((p + si, p + s + ti));
                }
            }
        }
        let symbolic = Arc::new(SymbolicLdl::analyze(k, edges)?);
        Ok(Self { p, s, t, matrix: SparseSymmetric::new(symbolic) })
    }

    pub fn dim(&self) -> usize {
        self.p + self.s + self.t
    }

    pub fn factor_nnz(&self) -> usize {
        self.matrix.symbolic().factor_nnz()
    }

    /// Fills the posterior precision `Q` and returns the canonical mean
    /// vector `h`, so the conditional is `N(Q⁻¹h, Q⁻¹)`.
    pub fn assemble(&mut self, data: &PanelDataset<T>, inp: &BlockInputs<'_, T>) -> Result<Vec<T>> {
        let (p, s, t) = (self.p, self.s, self.t);
        let k = self.dim();
        if inp.coef_mean.len() != p || inp.coef_var.len() != p {
            return Err(Error::Contract("coefficient prior length mismatch".into()));
        }
        let mut xx = Matrix::zeros(p, p);
        let mut x_loc = vec![T::zero(); s * p];
        let mut x_time = vec![T::zero(); t * p];
        let mut loc = vec![T::zero(); s];
        let mut time = vec![T::zero(); t];
        let mut cells = std::collections::BTreeMap::new();
        let mut h = vec![T::zero(); k];
        for &j in inp.rows {
            let x = data.x(j);
            let (sj, tj) = (data.location()[j], data.time()[j]);
            let w = inp.omega[j];
            let resid = inp.kappa[j] - w * inp.offset[j];
            for a in 0..p {
                let wa = w * x[a];
                for b in a..p {
                    xx[(a, b)] += wa * x[b];
                }
                x_loc[sj * p + a] += wa;
                x_time[tj * p + a] += wa;
                h[a] += x[a] * resid;
            }
            loc[sj] += w;
            time[tj] += w;
            *cells.entry((sj, tj)).or_insert(T::zero()) += w;
            h[p + sj] += resid;
            h[p + s + tj] += resid;
        }

        let m = &mut self.matrix;
        m.clear();
        for a in 0..p {
            let prec = T::one() / inp.coef_var[a];
            h[a] += prec * inp.coef_mean[a];
            m.add(a, a, prec)?;
            for b in a..p {
                if xx[(a, b)] != T::zero() {
                    m.add(a, b, xx[(a, b)])?;
                }
            }
        }
        for si in 0..s {
            m.add(p + si, p + si, loc[si])?;
            for a in 0..p {
                let v = x_loc[si * p + a];
                if v != T::zero() {
                    m.add(a, p + si, v)?;
                }
            }
        }
        for ti in 0..t {
            m.add(p + s + ti, p + s + ti, time[ti])?;
            for a in 0..p {
                let v = x_time[ti * p + a];
                if v != T::zero() {
                    m.add(a, p + s + ti, v)?;
                }
            }
        }
        for ((si, ti), v) in cells {
            m.add(p + si, p + s + ti, v)?;
        }
        let mut result = Ok(());
        let (gp, sigma) = inp.spatial;
        gp.for_each_precision_entry(T::one() / (sigma * sigma), |i, j, v| {
            if result.is_ok() {
                result = m.add(p + i, p + j, v);
            }
        });
        result?;
        let mut result = Ok(());
        let (gp, sigma) = inp.temporal;
        gp.for_each_precision_entry(T::one() / (sigma * sigma), |i, j, v| {
            if result.is_ok() {
                result = m.add(p + s + i, p + s + j, v);
            }
        });
        result?;
        Ok(h)
    }

    /// Factors the assembled precision, retrying once with a small ridge.
    pub fn factor(&mut self) -> Result<LdlFactor<T>> {
        match self.matrix.factor() {
            Ok(f) => Ok(f),
            Err(first) if first.is_numerical() => {
                log::warn!("posterior precision not positive definite, retrying with ridge: {first}");
                for i in 0..self.dim() {
                    self.matrix.add(i, i, T::of(RIDGE))?;
                }
                self.matrix.factor().map_err(|e| {
                    Error::Numerical(format!("posterior precision not positive definite after ridge: {e}"))
                })
            }
            Err(e) => Err(e),
        }
    }

    /// Dense copy of the last assembled precision.
    pub fn precision_dense(&self) -> Matrix<T> {
        self.matrix.to_dense()
    }

    /// Splits a stacked vector into its coefficient, spatial and temporal parts.
    pub fn split<'v>(&self, v: &'v [T]) -> (&'v [T], &'v [T], &'v [T]) {
        let (c, rest) = v.split_at(self.p);
        let (a, b) = rest.split_at(self.s);
        (c, a, b)
    }
}
