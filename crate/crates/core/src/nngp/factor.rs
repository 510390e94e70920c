use super::{KernelParams, NeighborSets, Points, SqExpCorrelation};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Real;

/// Sparse factor of the nearest-neighbor precision `(I − A)ᵀ D⁻¹ (I − A)`.
///
/// Rows are stored by ordered position; `point_of` maps a position back to
/// the caller's point index, so vectors passed in and out are always in
/// the caller's indexing.
#[derive(Clone, Debug)]
pub struct NngpFactor<T> {
    point_of: Vec<usize>,
    /// per position: (neighbor point index, coefficient)
    rows: Vec<Vec<(usize, T)>>,
    diag: Vec<T>,
}

impl<T: Real> NngpFactor<T> {
    /// Solves `ρ(N, N) a = ρ(N, i)` for every row and sets
    /// `d_i = 1 − aᵀ ρ(N, i)`.
    pub fn build(points: &Points<T>, sets: &NeighborSets, corr: &SqExpCorrelation<T>) -> Result<Self> {
        let n = sets.len();
        if points.len() != n {
            return Err(Error::Contract(format!(
                "neighbor sets cover {n} points but {} were given",
                points.len()
            )));
        }
        let mut rows = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        for (pos, nbrs) in sets.neighbors.iter().enumerate() {
            let i = sets.order[pos];
            if nbrs.is_empty() {
                rows.push(Vec::new());
                diag.push(T::one());
                continue;
            }
            let idx: Vec<usize> = nbrs.iter().map(|&q| sets.order[q]).collect();
            let k = idx.len();
            let sub = Matrix::from_fn(k, k, |r, c| corr.between(points, idx[r], idx[c]));
            let rhs: Vec<T> = idx.iter().map(|&j| corr.between(points, j, i)).collect();
            let chol = Cholesky::new(&sub).map_err(|e| {
                Error::Numerical(format!("neighbor submatrix of point {i} is singular: {e}"))
            })?;
            let a = chol.solve(&rhs);
            let d = T::one() - a.iter().zip(&rhs).map(|(&x, &y)| x * y).sum::<T>();
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::Numerical(format!(
                    "conditional variance {d} of point {i} is not positive"
                )));
            }
            rows.push(idx.into_iter().zip(a).collect());
            diag.push(d);
        }
        Ok(Self {
            point_of: sets.order.clone(),
            rows,
            diag,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Conditional variances `d_i` by ordered position.
    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    /// Nonzero coefficients of row `pos` as (point index, value).
    pub fn row(&self, pos: usize) -> &[(usize, T)] {
        &self.rows[pos]
    }

    pub fn point_of(&self, pos: usize) -> usize {
        self.point_of[pos]
    }

    /// `wᵀ ρ̃⁻¹ w = Σ_i (w_i − a_iᵀ w_{N(i)})² / d_i`.
    pub fn quad_form(&self, w: &[T]) -> Result<T> {
        if w.len() != self.len() {
            return Err(Error::Contract(format!(
                "vector of length {} against a factor over {} points",
                w.len(),
                self.len()
            )));
        }
        Ok(self
            .rows
            .iter()
            .enumerate()
            .map(|(pos, row)| {
                let r = w[self.point_of[pos]] - row.iter().map(|&(j, a)| a * w[j]).sum::<T>();
                r * r / self.diag[pos]
            })
            .sum())
    }

    /// `log det ρ̃ = Σ log d_i`.
    pub fn log_det(&self) -> Result<T> {
        let mut acc = T::zero();
        for (pos, &d) in self.diag.iter().enumerate() {
            if !(d > T::zero()) {
                return Err(Error::Numerical(format!(
                    "non-positive conditional variance at point {}",
                    self.point_of[pos]
                )));
            }
            acc += d.ln();
        }
        Ok(acc)
    }

    /// Visits the upper-triangular entries of `scale · ρ̃⁻¹` as
    /// `(i, j, value)` with `i <= j`, possibly repeating a pair.
    pub fn for_each_precision_entry(&self, scale: T, mut f: impl FnMut(usize, usize, T)) {
        for (pos, row) in self.rows.iter().enumerate() {
            let w = scale / self.diag[pos];
            let i = self.point_of[pos];
            f(i, i, w);
            for (k, &(j, a)) in row.iter().enumerate() {
                // (e_i − Σ a e_j)(e_i − Σ a e_j)ᵀ / d
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                f(lo, hi, -w * a);
                f(j, j, w * a * a);
                for &(j2, a2) in &row[k + 1..] {
                    let (lo, hi) = if j < j2 { (j, j2) } else { (j2, j) };
                    f(lo, hi, w * a * a2);
                }
            }
        }
    }

    /// Off-diagonal pairs that can be nonzero in `ρ̃⁻¹`.
    pub fn precision_pattern(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        self.for_each_precision_entry(T::one(), |i, j, _| {
            if i != j {
                edges.push((i, j));
            }
        });
        edges
    }

    /// Dense `ρ̃⁻¹`, for tests and small problems.
    pub fn precision_dense(&self) -> Matrix<T> {
        let n = self.len();
        let mut q = Matrix::zeros(n, n);
        self.for_each_precision_entry(T::one(), |i, j, v| {
            q[(i, j)] += v;
            if i != j {
                q[(j, i)] += v;
            }
        });
        q
    }
}

/// `log N(w | 0, σ² ρ̃)`.
pub fn gp_log_density<T: Real>(w: &[T], kp: &KernelParams<T>, factor: &NngpFactor<T>) -> Result<T> {
    let q = factor.quad_form(w)?;
    let ld = factor.log_det()?;
    let n = T::of_usize(w.len());
    let s2 = kp.sigma * kp.sigma;
    Ok(-T::of(0.5) * (n * (T::TAU() * s2).ln() + ld + q / s2))
}
