use std::sync::Arc;

use super::{build_neighbor_sets, NeighborSets, NngpFactor, OrderingRule, Points, SqExpCorrelation};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Real;

/// Correlation structure of one random-effect process at a fixed
/// length-scale: either the nearest-neighbor factor or an exact dense
/// Cholesky factor for short processes.
#[derive(Clone, Debug)]
pub enum GpPrior<T> {
    Nngp(NngpFactor<T>),
    Dense { chol: Cholesky<T>, precision: Matrix<T> },
}

impl<T: Real> GpPrior<T> {
    pub fn len(&self) -> usize {
        match self {
            GpPrior::Nngp(f) => f.len(),
            GpPrior::Dense { chol, .. } => chol.dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `wᵀ ρ⁻¹ w` under this structure.
    pub fn quad_form(&self, w: &[T]) -> Result<T> {
        match self {
            GpPrior::Nngp(f) => f.quad_form(w),
            GpPrior::Dense { chol, .. } => {
                if w.len() != chol.dim() {
                    return Err(Error::Contract(format!(
                        "vector of length {} against a {}-point process",
                        w.len(),
                        chol.dim()
                    )));
                }
                Ok(chol.quad_form(w))
            }
        }
    }

    pub fn log_det(&self) -> Result<T> {
        match self {
            GpPrior::Nngp(f) => f.log_det(),
            GpPrior::Dense { chol, .. } => Ok(chol.log_det()),
        }
    }

    /// `log N(w | 0, σ² ρ)`.
    pub fn log_density(&self, w: &[T], sigma: T) -> Result<T> {
        let q = self.quad_form(w)?;
        let ld = self.log_det()?;
        let s2 = sigma * sigma;
        Ok(-T::of(0.5) * (T::of_usize(w.len()) * (T::TAU() * s2).ln() + ld + q / s2))
    }

    /// Exact draw from `N(0, σ² ρ)` given i.i.d. standard normal `z`.
    pub fn sample(&self, sigma: T, z: &[T]) -> Result<Vec<T>> {
        if z.len() != self.len() {
            return Err(Error::Contract(format!(
                "{} normals for a {}-point process",
                z.len(),
                self.len()
            )));
        }
        let w = match self {
            GpPrior::Nngp(f) => {
                let mut w = vec![T::zero(); f.len()];
                for pos in 0..f.len() {
                    let i = f.point_of(pos);
                    let mean: T = f.row(pos).iter().map(|&(j, a)| a * w[j]).sum();
                    w[i] = mean + f.diag()[pos].sqrt() * z[i];
                }
                w
            }
            GpPrior::Dense { chol, .. } => chol.mul_lower(z),
        };
        Ok(w.into_iter().map(|v| v * sigma).collect())
    }

    /// Upper-triangular entries of `scale · ρ⁻¹`.
    pub fn for_each_precision_entry(&self, scale: T, mut f: impl FnMut(usize, usize, T)) {
        match self {
            GpPrior::Nngp(fac) => fac.for_each_precision_entry(scale, f),
            GpPrior::Dense { precision, .. } => {
                let n = precision.rows();
                for i in 0..n {
                    for j in i..n {
                        f(i, j, scale * precision[(i, j)]);
                    }
                }
            }
        }
    }
}

/// Everything about a process that does not depend on the length-scale:
/// the points, the conditioning sets, and the dense/NNGP choice.
#[derive(Clone, Debug)]
pub struct GpStructure<T> {
    points: Points<T>,
    sets: Option<Arc<NeighborSets>>,
    nugget: T,
}

impl<T: Real> GpStructure<T> {
    /// Uses the nearest-neighbor factor when the process has more than
    /// `dense_threshold` points, exact dense algebra otherwise. `m` is
    /// clamped to `n − 1`.
    pub fn new(
        mut points: Points<T>,
        m: usize,
        rule: OrderingRule,
        dense_threshold: usize,
        nugget: T,
    ) -> Result<Self> {
        let moved = points.jitter_duplicates();
        if moved > 0 {
            log::warn!("{moved} duplicate coordinates jittered apart");
        }
        let n = points.len();
        let sets = if n > dense_threshold {
            let m = m.min(n.saturating_sub(1)).max(1);
            Some(Arc::new(build_neighbor_sets(&points, m, rule)?))
        } else {
            None
        };
        Ok(Self { points, sets, nugget })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_nngp(&self) -> bool {
        self.sets.is_some()
    }

    pub fn points(&self) -> &Points<T> {
        &self.points
    }

    pub fn neighbor_sets(&self) -> Option<&NeighborSets> {
        self.sets.as_deref()
    }

    pub fn build(&self, l: T) -> Result<GpPrior<T>> {
        let corr = SqExpCorrelation::with_nugget(l, self.nugget)?;
        match &self.sets {
            Some(sets) => Ok(GpPrior::Nngp(NngpFactor::build(&self.points, sets, &corr)?)),
            None => {
                let n = self.points.len();
                let rho = Matrix::from_fn(n, n, |i, j| corr.between(&self.points, i, j));
                let chol = Cholesky::new(&rho)?;
                let precision = chol.inverse();
                Ok(GpPrior::Dense { chol, precision })
            }
        }
    }

    /// Off-diagonal pairs that can be nonzero in the prior precision.
    pub fn precision_pattern(&self) -> Vec<(usize, usize)> {
        match &self.sets {
            Some(sets) => {
                let mut edges = Vec::new();
                for (pos, nbrs) in sets.neighbors.iter().enumerate() {
                    let mut members: Vec<usize> = nbrs.iter().map(|&q| sets.order[q]).collect();
                    members.push(sets.order[pos]);
                    for (k, &a) in members.iter().enumerate() {
                        for &b in &members[k + 1..] {
                            edges.push((a, b));
                        }
                    }
                }
                edges
            }
            None => {
                let n = self.points.len();
                (0..n)
                    .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                    .collect()
            }
        }
    }
}
