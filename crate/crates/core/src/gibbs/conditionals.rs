//! Full conditionals that do not need the whole sampler: the at-risk
//! probability, inverse-gamma variance draws, and the two Metropolis
//! updates.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::nngp::{GpPrior, GpStructure};
use crate::scalar::{log_add_exp, softplus, Real};

/// `P(W = 1 | y = 0)` given both linear predictors and the dispersion,
/// evaluated as `πν^r / ((1 − π) + πν^r)` in log space.
pub fn at_risk_probability(eta1: f64, eta2: f64, r: f64) -> f64 {
    // log π, log(1 − π), r·log ν with ν = 1 − expit(η₂)
    let log_pi = -softplus(-eta1);
    let log_not_pi = -softplus(eta1);
    let log_nu_r = -r * softplus(eta2);
    let a = log_pi + log_nu_r;
    (a - log_add_exp(log_not_pi, a)).exp()
}

/// One draw from the inverse gamma with the given shape and rate.
pub fn draw_inverse_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
        return Err(Error::Domain(format!("inverse gamma needs positive shape and rate, got ({shape}, {rate})")));
    }
    let g = Gamma::new(shape, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(rate / g.sample(rng))
}

/// Shape and rate of the conditional of a GP variance σ².
pub fn gp_variance_posterior<T: Real>(w: &[T], prior: &GpPrior<T>, a: T, b: T) -> Result<(f64, f64)> {
    let q = prior.quad_form(w)?.to_f64_lossy();
    Ok((a.to_f64_lossy() + 0.5 * w.len() as f64, b.to_f64_lossy() + 0.5 * q))
}

/// Draws σ² ~ IG(a + n/2, b + wᵀρ⁻¹w/2).
pub fn update_gp_variance<T: Real, R: Rng + ?Sized>(
    w: &[T],
    prior: &GpPrior<T>,
    a: T,
    b: T,
    rng: &mut R,
) -> Result<T> {
    let (shape, rate) = gp_variance_posterior(w, prior, a, b)?;
    draw_inverse_gamma(shape, rate, rng).map(T::of)
}

/// Shape and rate of the conditional of a noise variance.
pub fn noise_variance_posterior<T: Real>(noise: &[T], a: T, b: T) -> (f64, f64) {
    let ss: f64 = noise.iter().map(|v| v.to_f64_lossy().powi(2)).sum();
    (a.to_f64_lossy() + 0.5 * noise.len() as f64, b.to_f64_lossy() + 0.5 * ss)
}

/// Draws σ²_ε ~ IG(a + n/2, b + Σε²/2).
pub fn update_noise_variance<T: Real, R: Rng + ?Sized>(noise: &[T], a: T, b: T, rng: &mut R) -> Result<T> {
    let (shape, rate) = noise_variance_posterior(noise, a, b);
    draw_inverse_gamma(shape, rate, rng).map(T::of)
}

/// Result of one Metropolis step on a length-scale.
pub struct LengthScaleMove<T> {
    pub l: T,
    pub accepted: bool,
    /// The structure rebuilt at the accepted value; `None` when the chain
    /// stayed put.
    pub prior: Option<GpPrior<T>>,
}

fn log_gamma_kernel(l: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * l.ln() - b * l
}

/// Log of the acceptance ratio for moving a length-scale from `l` to
/// `l_new`, with both structures already built.
pub fn length_scale_log_ratio<T: Real>(
    w: &[T],
    sigma: T,
    (l, current): (T, &GpPrior<T>),
    (l_new, proposed): (T, &GpPrior<T>),
    a_l: T,
    b_l: T,
) -> Result<f64> {
    let (a, b) = (a_l.to_f64_lossy(), b_l.to_f64_lossy());
    let new = proposed.log_density(w, sigma)?.to_f64_lossy() + log_gamma_kernel(l_new.to_f64_lossy(), a, b);
    let old = current.log_density(w, sigma)?.to_f64_lossy() + log_gamma_kernel(l.to_f64_lossy(), a, b);
    Ok(new - old)
}

/// Random-walk Metropolis update of a length-scale under a Gamma(a, b)
/// prior. Non-positive proposals and proposals whose structure cannot be
/// built are rejected.
#[allow(clippy::too_many_arguments)]
pub fn update_length_scale<T: Real, R: Rng + ?Sized>(
    w: &[T],
    sigma: T,
    l: T,
    current: &GpPrior<T>,
    structure: &GpStructure<T>,
    (a_l, b_l): (T, T),
    proposal_sd: T,
    rng: &mut R,
) -> Result<LengthScaleMove<T>> {
    let z: f64 = StandardNormal.sample(rng);
    let l_new = T::of(l.to_f64_lossy() + proposal_sd.to_f64_lossy() * z);
    let stay = LengthScaleMove { l, accepted: false, prior: None };
    if !(l_new > T::zero()) {
        return Ok(stay);
    }
    let proposed = match structure.build(l_new) {
        Ok(p) => p,
        Err(e) if e.is_numerical() => {
            log::warn!("length-scale proposal {l_new} rejected: {e}");
            return Ok(stay);
        }
        Err(e) => return Err(e),
    };
    let log_ratio = length_scale_log_ratio(w, sigma, (l, current), (l_new, &proposed), a_l, b_l)?;
    let u: f64 = rng.random();
    if log_ratio.is_finite() && u.ln() < log_ratio {
        Ok(LengthScaleMove { l: l_new, accepted: true, prior: Some(proposed) })
    } else {
        Ok(stay)
    }
}

/// `log NB(y | r, ψ)` with `ψ = expit(η)`, summed over the given pairs.
pub fn nb_log_likelihood(y: &[u64], eta: &[f64], r: f64) -> f64 {
    let lg_r = ln_gamma(r);
    y.iter()
        .zip(eta)
        .map(|(&y, &eta)| {
            let yf = y as f64;
            ln_gamma(yf + r) - lg_r - ln_gamma(yf + 1.0) - r * softplus(eta) - yf * softplus(-eta)
        })
        .sum()
}

/// `log Φ(x)` for the standard normal CDF. Only called with `x > 0`.
pub(crate) fn log_std_normal_cdf(x: f64) -> f64 {
    (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
}

/// Draws from `N(mean, sd²)` truncated to `(0, ∞)`.
pub(crate) fn draw_positive_normal<R: Rng + ?Sized>(mean: f64, sd: f64, rng: &mut R) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let v = mean + sd * z;
        if v > 0.0 {
            return v;
        }
    }
}

/// Result of one Metropolis step on the dispersion.
pub struct DispersionMove {
    pub r: f64,
    pub accepted: bool,
}

/// Metropolis update of `r` against the negative-binomial likelihood of
/// the at-risk counts, with a flat prior on `(0, r_max)` and a
/// zero-truncated normal proposal centred on the current value.
pub fn update_dispersion<R: Rng + ?Sized>(
    y: &[u64],
    eta: &[f64],
    r: f64,
    r_max: Option<f64>,
    proposal_sd: f64,
    rng: &mut R,
) -> DispersionMove {
    if !(proposal_sd > 0.0) {
        return DispersionMove { r, accepted: false };
    }
    let r_new = draw_positive_normal(r, proposal_sd, rng);
    if r_max.is_some_and(|m| r_new >= m) {
        return DispersionMove { r, accepted: false };
    }
    // q(r | r*) / q(r* | r) reduces to Φ(r/sd) / Φ(r*/sd)
    let log_ratio = nb_log_likelihood(y, eta, r_new) - nb_log_likelihood(y, eta, r)
        + log_std_normal_cdf(r / proposal_sd)
        - log_std_normal_cdf(r_new / proposal_sd);
    let u: f64 = rng.random();
    if log_ratio.is_finite() && u.ln() < log_ratio {
        DispersionMove { r: r_new, accepted: true }
    } else {
        DispersionMove { r, accepted: false }
    }
}
