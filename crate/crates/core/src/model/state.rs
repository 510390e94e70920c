use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DesignMaps, PanelDataset, PriorSpec};
use crate::error::{contract, Result};
use crate::nngp::KernelParams;
use crate::scalar::Real;

/// Parameters of one model component (the at-risk logit or the
/// negative-binomial count part).
///
/// For the binary component the fields correspond to α, a, b, ε₁₁, ε₁₂,
/// (σ₁₁, l₁₁), (σ₁₂, l₁₂), σ_ε₁₁, σ_ε₁₂; for the count component to β, c,
/// d, ε₂₁, ε₂₂ and the matching hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ComponentState<T: Real> {
    pub coef: Vec<T>,
    pub spatial: Vec<T>,
    pub temporal: Vec<T>,
    pub spatial_noise: Vec<T>,
    pub temporal_noise: Vec<T>,
    pub spatial_kernel: KernelParams<T>,
    pub temporal_kernel: KernelParams<T>,
    pub spatial_noise_sd: T,
    pub temporal_noise_sd: T,
}

impl<T: Real> ComponentState<T> {
    pub fn zeros(p: usize, s: usize, t: usize, spatial_l: T, temporal_l: T) -> Self {
        Self {
            coef: vec![T::zero(); p],
            spatial: vec![T::zero(); s],
            temporal: vec![T::zero(); t],
            spatial_noise: vec![T::zero(); s],
            temporal_noise: vec![T::zero(); t],
            spatial_kernel: KernelParams { sigma: T::one(), l: spatial_l },
            temporal_kernel: KernelParams { sigma: T::one(), l: temporal_l },
            spatial_noise_sd: T::one(),
            temporal_noise_sd: T::one(),
        }
    }

    /// Linear predictor of observation `j`.
    #[inline]
    pub fn eta(&self, x: &[T], s: usize, t: usize) -> T {
        let fixed: T = x.iter().zip(&self.coef).map(|(&a, &b)| a * b).sum();
        fixed + self.spatial[s] + self.temporal[t] + self.spatial_noise[s] + self.temporal_noise[t]
    }

    fn check_dims(&self, p: usize, s: usize, t: usize) -> Result<()> {
        if self.coef.len() != p
            || self.spatial.len() != s
            || self.spatial_noise.len() != s
            || self.temporal.len() != t
            || self.temporal_noise.len() != t
        {
            return Err(contract(format!(
                "component dimensions ({}, {}, {}) do not match data ({p}, {s}, {t})",
                self.coef.len(),
                self.spatial.len(),
                self.temporal.len()
            )));
        }
        Ok(())
    }
}

/// Full state of one chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ChainState<T: Real> {
    pub binary: ComponentState<T>,
    pub count: ComponentState<T>,
    /// negative-binomial dispersion
    pub r: T,
    /// latent at-risk indicators W
    pub at_risk: Vec<bool>,
    /// Pólya-Gamma weights of the binary component
    pub omega_binary: Vec<T>,
    /// Pólya-Gamma weights of the count component; refreshed only where
    /// the observation is at risk
    pub omega_count: Vec<T>,
}

impl<T: Real> ChainState<T> {
    /// Neutral start: zero coefficients and effects, unit variances,
    /// length-scales at their prior means, `r = 1`, and `W = 1` for
    /// positive counts with a fair coin on the zeros.
    pub fn initial<R: Rng + ?Sized>(data: &PanelDataset<T>, priors: &PriorSpec<T>, rng: &mut R) -> Self {
        let (ls, lt) = priors.length_scale_means();
        let (p, s, t, n) = (data.n_coef(), data.n_locations(), data.n_times(), data.n_obs());
        let at_risk = data.y().iter().map(|&y| y > 0 || rng.random::<bool>()).collect();
        Self {
            binary: ComponentState::zeros(p, s, t, ls, lt),
            count: ComponentState::zeros(p, s, t, ls, lt),
            r: T::one(),
            at_risk,
            omega_binary: vec![T::of(0.25); n],
            omega_count: vec![T::of(0.25); n],
        }
    }

    pub fn check_dims(&self, data: &PanelDataset<T>) -> Result<()> {
        let (p, s, t) = (data.n_coef(), data.n_locations(), data.n_times());
        self.binary.check_dims(p, s, t)?;
        self.count.check_dims(p, s, t)?;
        let n = data.n_obs();
        if self.at_risk.len() != n || self.omega_binary.len() != n || self.omega_count.len() != n {
            return Err(contract("per-observation state does not match the data"));
        }
        Ok(())
    }
}

/// `(η₁, η₂)` for every observation.
pub fn linear_predictors<T: Real>(
    state: &ChainState<T>,
    data: &PanelDataset<T>,
    maps: &DesignMaps,
) -> Result<(Vec<T>, Vec<T>)> {
    state.check_dims(data)?;
    if maps.n_obs() != data.n_obs() {
        return Err(contract("design maps built for a different dataset"));
    }
    let n = data.n_obs();
    let mut eta1 = Vec::with_capacity(n);
    let mut eta2 = Vec::with_capacity(n);
    for j in 0..n {
        let (s, t) = (maps.location_of(j), maps.time_of(j));
        eta1.push(state.binary.eta(data.x(j), s, t));
        eta2.push(state.count.eta(data.x(j), s, t));
    }
    Ok((eta1, eta2))
}
