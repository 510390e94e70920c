//! Squared-exponential Gaussian processes and their nearest-neighbor
//! approximation.
//!
//! The approximate precision of `n` ordered points is
//! `ρ̃⁻¹ = (I − A)ᵀ D⁻¹ (I − A)` where row `i` of the strictly lower
//! triangular `A` is supported on the (at most `m`) nearest earlier points.
//! Everything here works on the unit-variance correlation; amplitudes enter
//! only through [`gp_log_density`] and the sampler.

mod factor;
mod neighbors;
mod prior;

pub use factor::{gp_log_density, NngpFactor};
pub use neighbors::{build_neighbor_sets, NeighborSets, OrderingRule};
pub use prior::{GpPrior, GpStructure};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Amplitude and length-scale of one squared-exponential process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct KernelParams<T: Real> {
    pub sigma: T,
    pub l: T,
}

impl<T: Real> KernelParams<T> {
    pub fn new(sigma: T, l: T) -> Result<Self> {
        if !(sigma > T::zero()) || !(l > T::zero()) {
            return Err(Error::Domain(format!(
                "kernel parameters must be positive (sigma={sigma}, l={l})"
            )));
        }
        Ok(Self { sigma, l })
    }
}

/// A set of points in `dim`-dimensional Euclidean space, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Points<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> Points<T> {
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::Contract(format!(
                "{} coordinates do not split into points of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn planar(coords: &[[T; 2]]) -> Self {
        Self {
            dim: 2,
            data: coords.iter().flat_map(|c| c.iter().copied()).collect(),
        }
    }

    pub fn line(values: &[T]) -> Self {
        Self {
            dim: 1,
            data: values.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn dist2(&self, i: usize, j: usize) -> T {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum()
    }

    /// Nudges exact duplicates apart by `1e-8` times the bounding-box
    /// diagonal. Returns how many points moved.
    pub fn jitter_duplicates(&mut self) -> usize {
        let n = self.len();
        let mut diam2 = T::zero();
        for k in 0..self.dim {
            let (lo, hi) = (0..n).fold((T::infinity(), T::neg_infinity()), |(lo, hi), i| {
                let v = self.data[i * self.dim + k];
                (lo.min(v), hi.max(v))
            });
            if n > 0 {
                diam2 += (hi - lo) * (hi - lo);
            }
        }
        let step = T::of(1e-8) * if diam2 > T::zero() { diam2.sqrt() } else { T::one() };
        let mut moved = 0;
        for i in 1..n {
            let mut bump = 0usize;
            while (0..i).any(|j| self.dist2(i, j) == T::zero()) {
                bump += 1;
                self.data[i * self.dim] += step * T::of_usize(bump);
            }
            if bump > 0 {
                moved += 1;
            }
        }
        moved
    }
}

/// `exp(−‖h_i − h_j‖² / l²)`.
pub fn sq_exp_corr<T: Real>(hi: &[T], hj: &[T], l: T) -> Result<T> {
    if !(l > T::zero()) {
        return Err(Error::Domain(format!("length-scale must be positive, got {l}")));
    }
    let d2: T = hi.iter().zip(hj).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok((-d2 / (l * l)).exp())
}

/// Squared-exponential correlation with an optional nugget,
/// `(1 − τ) exp(−d²/l²) + τ·1[i = j]`. The diagonal stays exactly one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqExpCorrelation<T> {
    pub l: T,
    pub nugget: T,
}

impl<T: Real> SqExpCorrelation<T> {
    pub fn new(l: T) -> Result<Self> {
        Self::with_nugget(l, T::zero())
    }

    pub fn with_nugget(l: T, nugget: T) -> Result<Self> {
        if !(l > T::zero()) || !l.is_finite() {
            return Err(Error::Domain(format!("length-scale must be positive, got {l}")));
        }
        if nugget < T::zero() || nugget >= T::one() {
            return Err(Error::Domain(format!("nugget must lie in [0, 1), got {nugget}")));
        }
        Ok(Self { l, nugget })
    }

    #[inline]
    pub fn between(&self, points: &Points<T>, i: usize, j: usize) -> T {
        if i == j {
            return T::one();
        }
        (T::one() - self.nugget) * (-points.dist2(i, j) / (self.l * self.l)).exp()
    }
}
