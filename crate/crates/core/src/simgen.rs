//! Synthetic panels drawn from the model itself, for recovery studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::model::{ChainState, ComponentState, PanelDataset};
use crate::nngp::{sq_exp_corr, KernelParams};
use crate::pg::pg_mean;
use crate::scalar::{expit, Real};

/// Diagonal jitter added to dense correlation matrices before factoring.
const GP_JITTER: f64 = 1e-10;
/// Above this mean the count draw switches from pmf inversion to a
/// gamma-Poisson mixture (the same distribution).
const INVERSION_MEAN_LIMIT: f64 = 1e3;

/// How many observations each location-time cell receives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum Repetition {
    FixedOne,
    Poisson { mean: f64 },
}

/// True parameters of one model component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentTruth {
    /// intercept then slope(s)
    pub coef: Vec<f64>,
    pub spatial: KernelParams<f64>,
    pub temporal: KernelParams<f64>,
    pub spatial_noise_sd: f64,
    pub temporal_noise_sd: f64,
}

/// A complete simulation design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDesign {
    pub n_locations: usize,
    pub n_times: usize,
    pub repetition: Repetition,
    pub binary: ComponentTruth,
    pub count: ComponentTruth,
    pub r: f64,
    pub seed: u64,
}

fn table_component(coef: [f64; 2]) -> ComponentTruth {
    ComponentTruth {
        coef: coef.to_vec(),
        spatial: KernelParams { sigma: 0.5, l: 0.35 },
        temporal: KernelParams { sigma: 0.2, l: 1.0 },
        spatial_noise_sd: 0.05,
        temporal_noise_sd: 0.05,
    }
}

impl SimDesign {
    /// 200 locations, 20 times, one observation per cell.
    pub fn sim1() -> Self {
        Self {
            n_locations: 200,
            n_times: 20,
            repetition: Repetition::FixedOne,
            binary: table_component([-0.25, 0.25]),
            count: table_component([0.5, -0.25]),
            r: 1.0,
            seed: 1,
        }
    }

    /// As [`SimDesign::sim1`] with 500 locations.
    pub fn sim2() -> Self {
        Self { n_locations: 500, ..Self::sim1() }
    }

    /// As [`SimDesign::sim1`] with Poisson(2) observations per cell.
    pub fn sim3() -> Self {
        Self { repetition: Repetition::Poisson { mean: 2.0 }, ..Self::sim1() }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "sim1" => Ok(Self::sim1()),
            "sim2" => Ok(Self::sim2()),
            "sim3" => Ok(Self::sim3()),
            other => Err(Error::Config(format!("unknown preset '{other}' (expected sim1, sim2 or sim3)"))),
        }
    }

    /// Shrinks (or grows) both panel dimensions by `factor`, keeping at
    /// least two locations and two times.
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Config(format!("scale must be positive, got {factor}")));
        }
        self.n_locations = ((self.n_locations as f64 * factor).round() as usize).max(2);
        self.n_times = ((self.n_times as f64 * factor).round() as usize).max(2);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_locations == 0 || self.n_times == 0 {
            return Err(Error::Config("a design needs at least one location and one time".into()));
        }
        if let Repetition::Poisson { mean } = self.repetition {
            if !(mean > 0.0 && mean.is_finite()) {
                return Err(Error::Config(format!("repetition mean must be positive, got {mean}")));
            }
        }
        if self.binary.coef.len() != self.count.coef.len() || self.binary.coef.is_empty() {
            return Err(Error::Config("both components need the same number of coefficients (intercept first)".into()));
        }
        for (name, c) in [("binary", &self.binary), ("count", &self.count)] {
            for kp in [c.spatial, c.temporal] {
                if !(kp.sigma >= 0.0 && kp.l > 0.0 && kp.sigma.is_finite() && kp.l.is_finite()) {
                    return Err(Error::Config(format!("{name} kernel needs sigma >= 0 and l > 0")));
                }
            }
            if !(c.spatial_noise_sd >= 0.0 && c.temporal_noise_sd >= 0.0) {
                return Err(Error::Config(format!("{name} noise sds must be non-negative")));
            }
            if c.coef.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{name} coefficients must be finite")));
            }
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::Config(format!("r must be positive, got {}", self.r)));
        }
        Ok(())
    }
}

/// Mean of the zero-inflated negative binomial, `φ·r·ψ/(1 − ψ)`.
pub fn zinb_mean(phi: f64, psi: f64, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) || !(0.0..=1.0).contains(&psi) || !(r > 0.0) {
        return Err(Error::Domain(format!("invalid (φ, ψ, r) = ({phi}, {psi}, {r})")));
    }
    if psi >= 1.0 {
        return Err(Error::Domain("ψ = 1 gives an infinite mean".into()));
    }
    Ok(phi * r * psi / (1.0 - psi))
}

/// Mean `r·e^η` and variance `μ(1 + μ/r)` of the negative binomial part.
pub fn nb_moments(r: f64, eta: f64) -> (f64, f64) {
    let mu = r * eta.exp();
    (mu, mu * (1.0 + mu / r))
}

/// Draws from `NB(r, ψ)`: `P(y) = Γ(y + r)/(Γ(r) y!) (1 − ψ)^r ψ^y`.
pub fn draw_negative_binomial<R: Rng + ?Sized>(r: f64, psi: f64, rng: &mut R) -> u64 {
    if psi <= 0.0 {
        return 0;
    }
    let mean = r * psi / (1.0 - psi);
    if mean > INVERSION_MEAN_LIMIT || !mean.is_finite() {
        let rate = Gamma::new(r, psi / (1.0 - psi)).map(|g| g.sample(rng)).unwrap_or(mean);
        return Poisson::new(rate.max(f64::MIN_POSITIVE)).map_or(mean as u64, |p| p.sample(rng) as u64);
    }
    let u: f64 = rng.random();
    let mut p = ((1.0 - psi).ln() * r).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf {
        p *= psi * (k as f64 + r) / (k as f64 + 1.0);
        k += 1;
        cdf += p;
        if p < 1e-300 && cdf < u {
            // cdf stalled below u by rounding; the remaining mass is negligible
            break;
        }
    }
    k
}

fn draw_gp<R: Rng + ?Sized>(points: &[Vec<f64>], kp: KernelParams<f64>, rng: &mut R) -> Result<Vec<f64>> {
    let n = points.len();
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    if kp.sigma == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let rho = Matrix::from_fn(n, n, |i, j| {
        let c = sq_exp_corr(&points[i], &points[j], kp.l).unwrap_or(0.0);
        if i == j {
            c + GP_JITTER
        } else {
            c
        }
    });
    let chol = Cholesky::new(&rho)?;
    Ok(chol.mul_lower(&z).into_iter().map(|v| v * kp.sigma).collect())
}

fn draw_noise<R: Rng + ?Sized>(n: usize, sd: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| { let z: f64 = StandardNormal.sample(rng); sd * z }).collect()
}

fn component_state<T: Real>(
    truth: &ComponentTruth,
    effects: [Vec<f64>; 4],
) -> ComponentState<T> {
    let conv = |v: &[f64]| v.iter().map(|&x| T::of(x)).collect::<Vec<T>>();
    let kp = |k: KernelParams<f64>| KernelParams { sigma: T::of(k.sigma), l: T::of(k.l) };
    ComponentState {
        coef: conv(&truth.coef),
        spatial: conv(&effects[0]),
        temporal: conv(&effects[1]),
        spatial_noise: conv(&effects[2]),
        temporal_noise: conv(&effects[3]),
        spatial_kernel: kp(truth.spatial),
        temporal_kernel: kp(truth.temporal),
        spatial_noise_sd: T::of(truth.spatial_noise_sd),
        temporal_noise_sd: T::of(truth.temporal_noise_sd),
    }
}

/// Simulates a panel from `design` and returns it with the full truth.
///
/// Locations are uniform on the unit square, time points are `1..=T`,
/// effects come from exact dense Gaussian processes, and covariates are
/// standard normal. In the returned state the Pólya-Gamma weights are set
/// to their conditional means.
pub fn simulate_dataset<T: Real>(design: &SimDesign) -> Result<(PanelDataset<T>, ChainState<T>)> {
    design.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(design.seed);
    let (s, t) = (design.n_locations, design.n_times);
    let coords: Vec<[f64; 2]> = (0..s).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let loc_points: Vec<Vec<f64>> = coords.iter().map(|c| c.to_vec()).collect();
    let time_points: Vec<f64> = (1..=t).map(|v| v as f64).collect();
    let time_pts: Vec<Vec<f64>> = time_points.iter().map(|&v| vec![v]).collect();

    let draw_component = |c: &ComponentTruth, rng: &mut ChaCha20Rng| -> Result<[Vec<f64>; 4]> {
        Ok([
            draw_gp(&loc_points, c.spatial, rng)?,
            draw_gp(&time_pts, c.temporal, rng)?,
            draw_noise(s, c.spatial_noise_sd, rng),
            draw_noise(t, c.temporal_noise_sd, rng),
        ])
    };
    let bin_eff = draw_component(&design.binary, &mut rng)?;
    let cnt_eff = draw_component(&design.count, &mut rng)?;
    let binary: ComponentState<f64> = component_state(&design.binary, bin_eff.clone());
    let count: ComponentState<f64> = component_state(&design.count, cnt_eff.clone());

    let n_cov = design.binary.coef.len() - 1;
    let rep = match design.repetition {
        Repetition::FixedOne => None,
        Repetition::Poisson { mean } => Some(Poisson::new(mean).map_err(|e| Error::Config(e.to_string()))?),
    };
    let (mut y, mut covs, mut loc, mut time, mut w) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (mut om1, mut om2) = (Vec::new(), Vec::new());
    for si in 0..s {
        for ti in 0..t {
            let n_cell = match &rep {
                None => 1,
                Some(p) => p.sample(&mut rng) as usize,
            };
            for _ in 0..n_cell {
                let x_row: Vec<f64> = (0..n_cov).map(|_| StandardNormal.sample(&mut rng)).collect();
                let mut x = vec![1.0];
                x.extend_from_slice(&x_row);
                let eta1 = binary.eta(&x, si, ti);
                let eta2 = count.eta(&x, si, ti);
                let at_risk = rng.random::<f64>() < expit(eta1);
                let count_draw = if at_risk {
                    draw_negative_binomial(design.r, expit(eta2), &mut rng)
                } else {
                    0
                };
                y.push(count_draw);
                covs.push(x_row.into_iter().map(T::of).collect());
                loc.push(si);
                time.push(ti);
                w.push(at_risk);
                om1.push(T::of(pg_mean(1.0, eta1)));
                om2.push(T::of(pg_mean(count_draw as f64 + design.r, eta2)));
            }
        }
    }
    let data = PanelDataset::new(
        y,
        covs,
        loc,
        time,
        coords.iter().map(|c| [T::of(c[0]), T::of(c[1])]).collect(),
        time_points.iter().map(|&v| T::of(v)).collect(),
    )?;
    let truth = ChainState {
        binary: component_state(&design.binary, bin_eff),
        count: component_state(&design.count, cnt_eff),
        r: T::of(design.r),
        at_risk: w,
        omega_binary: om1,
        omega_count: om2,
    };
    Ok((data, truth))
}
