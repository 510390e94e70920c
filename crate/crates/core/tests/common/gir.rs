//! Joint-distribution ("getting it right") check on a tiny model: draws of
//! (θ, data) from the prior and likelihood are compared with the
//! marginals of a chain that alternates sampler sweeps with fresh data.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::{rng, Check};
use zinb_nngp::diagnostics::{effective_sample_size, ks_two_sample};
use zinb_nngp::gibbs::{ChainConfig, Sampler};
use zinb_nngp::model::{ChainState, CoefficientPrior, ComponentState, PanelDataset, PriorSpec};
use zinb_nngp::nngp::KernelParams;
use zinb_nngp::simgen::draw_negative_binomial;

const COORDS: [[f64; 2]; 3] = [[0.0, 0.0], [0.6, 0.1], [0.2, 0.7]];
const TIMES: [f64; 2] = [1.0, 2.0];
const L_SPATIAL: f64 = 0.5;
const L_TEMPORAL: f64 = 1.5;
const R_MAX: f64 = 3.0;

/// Quantities whose marginals are compared.
pub const TRACKED: [&str; 11] = [
    "alpha0",
    "alpha1",
    "beta0",
    "beta1",
    "r",
    "sigma11",
    "sigma12",
    "sigma21",
    "sigma22",
    "sigma_eps11",
    "sigma_eps21",
];

pub fn priors() -> PriorSpec<f64> {
    PriorSpec {
        coef_binary: CoefficientPrior { mean: vec![0.3, 0.0], variance: vec![0.5, 0.5] },
        coef_count: CoefficientPrior { mean: vec![0.5, 0.0], variance: vec![0.5, 0.5] },
        a_sigma1: 4.0,
        b_sigma1: 1.5,
        a_sigma2: 4.0,
        b_sigma2: 1.0,
        // gamma means a/b are the fixed length-scales
        a_l1: 1.0,
        b_l1: 1.0 / L_SPATIAL,
        a_l2: 3.0,
        b_l2: 3.0 / L_TEMPORAL,
        a_eps: 4.0,
        b_eps: 0.3,
        r_max: Some(R_MAX),
        r_proposal_sd: 0.5,
        ..PriorSpec::default()
    }
}

fn design() -> PanelDataset<f64> {
    let mut loc = Vec::new();
    let mut time = Vec::new();
    let mut x = Vec::new();
    for s in 0..3 {
        for t in 0..2 {
            for k in 0..2 {
                loc.push(s);
                time.push(t);
                x.push(vec![((s * 4 + t * 2 + k) as f64 * 0.37).sin() * 1.2]);
            }
        }
    }
    PanelDataset::new(vec![0; 12], x, loc, time, COORDS.to_vec(), TIMES.to_vec()).unwrap()
}

fn chol(corr: DMatrix<f64>) -> DMatrix<f64> {
    corr.cholesky().unwrap().l()
}

fn inverse_gamma(shape: f64, rate: f64, r: &mut ChaCha20Rng) -> f64 {
    rate / Gamma::new(shape, 1.0).unwrap().sample(r)
}

fn normals(n: usize, r: &mut ChaCha20Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(r))
}

fn prior_component(
    prior: &CoefficientPrior<f64>,
    p: &PriorSpec<f64>,
    ls: &DMatrix<f64>,
    lt: &DMatrix<f64>,
    r: &mut ChaCha20Rng,
) -> ComponentState<f64> {
    let coef = (0..2)
        .map(|i| prior.mean[i] + prior.variance[i].sqrt() * Distribution::<f64>::sample(&StandardNormal, r))
        .collect();
    let s_sd = inverse_gamma(p.a_sigma1, p.b_sigma1, r).sqrt();
    let t_sd = inverse_gamma(p.a_sigma2, p.b_sigma2, r).sqrt();
    let spatial = (ls * normals(3, r) * s_sd).as_slice().to_vec();
    let temporal = (lt * normals(2, r) * t_sd).as_slice().to_vec();
    let e_s = inverse_gamma(p.a_eps, p.b_eps, r).sqrt();
    let e_t = inverse_gamma(p.a_eps, p.b_eps, r).sqrt();
    let spatial_noise = (normals(3, r) * e_s).as_slice().to_vec();
    let temporal_noise = (normals(2, r) * e_t).as_slice().to_vec();
    ComponentState {
        coef,
        spatial,
        temporal,
        spatial_noise,
        temporal_noise,
        spatial_kernel: KernelParams { sigma: s_sd, l: L_SPATIAL },
        temporal_kernel: KernelParams { sigma: t_sd, l: L_TEMPORAL },
        spatial_noise_sd: e_s,
        temporal_noise_sd: e_t,
    }
}

/// One draw of every parameter from its prior, with dense GP algebra.
fn prior_state(r: &mut ChaCha20Rng) -> ChainState<f64> {
    let p = priors();
    let ls = chol(DMatrix::from_fn(3, 3, |i, j| {
        let d2 = (COORDS[i][0] - COORDS[j][0]).powi(2) + (COORDS[i][1] - COORDS[j][1]).powi(2);
        (-d2 / (L_SPATIAL * L_SPATIAL)).exp()
    }));
    let lt = chol(DMatrix::from_fn(2, 2, |i, j| {
        (-(TIMES[i] - TIMES[j]).powi(2) / (L_TEMPORAL * L_TEMPORAL)).exp()
    }));
    let binary = prior_component(&p.coef_binary, &p, &ls, &lt, r);
    let count = prior_component(&p.coef_count, &p, &ls, &lt, r);
    ChainState {
        binary,
        count,
        r: r.random::<f64>() * R_MAX,
        at_risk: vec![true; 12],
        omega_binary: vec![0.25; 12],
        omega_count: vec![0.25; 12],
    }
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn eta(data: &PanelDataset<f64>, c: &ComponentState<f64>, j: usize) -> f64 {
    let (s, t) = (data.location()[j], data.time()[j]);
    let x = data.x(j);
    c.coef[0] * x[0] + c.coef[1] * x[1] + c.spatial[s] + c.temporal[t] + c.spatial_noise[s] + c.temporal_noise[t]
}

/// Draws `(W, y)` from the model given the state.
fn simulate(data: &PanelDataset<f64>, st: &ChainState<f64>, r: &mut ChaCha20Rng) -> (Vec<u64>, Vec<bool>) {
    (0..data.n_obs())
        .map(|j| {
            let w = r.random::<f64>() < expit(eta(data, &st.binary, j));
            let y = if w { draw_negative_binomial(st.r, expit(eta(data, &st.count, j)), r) } else { 0 };
            (y, w)
        })
        .unzip()
}

fn tracked(st: &ChainState<f64>) -> [f64; 11] {
    [
        st.binary.coef[0],
        st.binary.coef[1],
        st.count.coef[0],
        st.count.coef[1],
        st.r,
        st.binary.spatial_kernel.sigma,
        st.binary.temporal_kernel.sigma,
        st.count.spatial_kernel.sigma,
        st.count.temporal_kernel.sigma,
        st.binary.spatial_noise_sd,
        st.count.spatial_noise_sd,
    ]
}

pub struct GirRun {
    pub marginal: Vec<Vec<f64>>,
    pub successive: Vec<Vec<f64>>,
}

/// Runs `sweeps` successive-conditional sweeps, keeping every `thin`-th
/// state, and draws as many marginal-conditional samples as kept states.
pub fn run(sweeps: usize, thin: usize, seed: u64) -> GirRun {
    let mut r = rng(seed);
    let mut data = design();
    let kept = sweeps / thin;
    let mut marginal = vec![Vec::with_capacity(kept); TRACKED.len()];
    for _ in 0..kept {
        let st = prior_state(&mut r);
        // the data draw is part of the joint but does not touch θ
        let _ = simulate(&data, &st, &mut r);
        for (m, v) in marginal.iter_mut().zip(tracked(&st)) {
            m.push(v);
        }
    }

    let mut st = prior_state(&mut r);
    let (y, w) = simulate(&data, &st, &mut r);
    data.set_counts(y).unwrap();
    st.at_risk = w;
    let config = ChainConfig {
        n_iter: sweeps + 1,
        burn_in: 0,
        fix_length_scales: true,
        adapt_proposals: false,
        nugget: 0.0,
        nngp_threshold_temporal: 0,
        ..ChainConfig::default()
    };
    let mut sampler = Sampler::new(data.clone(), priors(), config, &mut r).unwrap();
    sampler.set_state(st).unwrap();
    let mut successive = vec![Vec::with_capacity(kept); TRACKED.len()];
    for i in 1..=sweeps {
        sampler.sweep(&mut r).unwrap();
        let (y, w) = simulate(&data, sampler.state(), &mut r);
        sampler.set_counts(y, w).unwrap();
        if i % thin == 0 {
            for (m, v) in successive.iter_mut().zip(tracked(sampler.state())) {
                m.push(v);
            }
        }
    }
    GirRun { marginal, successive }
}

pub fn checks(run: &GirRun, alpha: f64) -> Vec<Check> {
    TRACKED
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let ks = ks_two_sample(&run.marginal[i], &run.successive[i]);
            let ess = effective_sample_size(&run.successive[i]);
            Check::new(
                format!("getting-it-right {name}"),
                ks.p_value > alpha,
                format!("D = {:.4}, p = {:.4}, chain ESS {ess:.0}", ks.statistic, ks.p_value),
            )
        })
        .collect()
}

