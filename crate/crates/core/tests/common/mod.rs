//! Oracles shared by the integration tests and the acceptance gate.
#![allow(dead_code)]

pub mod gir;
pub mod nngp;
pub mod pg;
pub mod recovery;
pub mod scaling;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::function::gamma::gamma_ur;

use zinb_nngp::diagnostics::ks_one_sample;
use zinb_nngp::gibbs::{Axis, ChainConfig, Component, Sampler};
use zinb_nngp::model::{ChainState, CoefficientPrior, ComponentState, PanelDataset, PriorSpec};
use zinb_nngp::nngp::KernelParams;

/// One pass/fail outcome with enough detail to diagnose a failure.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

pub fn assert_all(checks: &[Check]) {
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    assert!(failed.is_empty(), "failed checks: {failed:#?}");
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

// --- the five-observation instance ---

const COORDS: [[f64; 2]; 2] = [[0.1, 0.2], [0.5, 0.4]];
const TIMES: [f64; 2] = [1.0, 2.0];
const LOC: [usize; 5] = [0, 0, 1, 1, 1];
const TIME: [usize; 5] = [0, 1, 0, 1, 1];
const X1: [f64; 5] = [0.3, -1.2, 0.8, 0.1, -0.4];
const Y: [u64; 5] = [0, 3, 0, 1, 5];
const AT_RISK: [bool; 5] = [false, true, true, true, true];

pub fn five_obs_priors() -> PriorSpec<f64> {
    PriorSpec {
        coef_binary: CoefficientPrior { mean: vec![0.1, -0.1], variance: vec![2.0, 3.0] },
        coef_count: CoefficientPrior { mean: vec![-0.3, 0.2], variance: vec![1.5, 0.5] },
        a_sigma1: 2.0,
        b_sigma1: 0.7,
        a_sigma2: 3.0,
        b_sigma2: 0.4,
        a_eps: 2.5,
        b_eps: 0.3,
        ..PriorSpec::default()
    }
}

fn component(shift: f64) -> ComponentState<f64> {
    ComponentState {
        coef: vec![-0.2 + shift, 0.4],
        spatial: vec![0.3, -0.1 + shift],
        temporal: vec![0.2, 0.05],
        spatial_noise: vec![0.04, -0.07],
        temporal_noise: vec![-0.02 + shift, 0.06],
        spatial_kernel: KernelParams { sigma: 0.8, l: 0.6 },
        temporal_kernel: KernelParams { sigma: 0.5, l: 1.5 },
        spatial_noise_sd: 0.3,
        temporal_noise_sd: 0.25,
    }
}

/// Sampler on a 5-observation, 2-location, 2-time instance with a fixed
/// state and fixed Pólya-Gamma weights; one observation is a structural
/// zero so the count component sees four rows.
pub fn five_obs_sampler(fix_length_scales: bool) -> Sampler<f64> {
    let data = PanelDataset::new(
        Y.to_vec(),
        X1.iter().map(|&v| vec![v]).collect(),
        LOC.to_vec(),
        TIME.to_vec(),
        COORDS.to_vec(),
        TIMES.to_vec(),
    )
    .unwrap();
    let config = ChainConfig { nugget: 0.0, fix_length_scales, n_iter: 10, burn_in: 0, ..Default::default() };
    let mut s = Sampler::new(data, five_obs_priors(), config, &mut rng(0)).unwrap();
    let state = ChainState {
        binary: component(0.0),
        count: component(0.15),
        r: 1.3,
        at_risk: AT_RISK.to_vec(),
        omega_binary: vec![0.21, 0.18, 0.25, 0.22, 0.2],
        omega_count: vec![0.5, 0.9, 0.7, 1.1, 1.6],
    };
    s.set_state(state).unwrap();
    s
}

fn comp_state(s: &ChainState<f64>, c: Component) -> &ComponentState<f64> {
    match c {
        Component::Binary => &s.binary,
        Component::Count => &s.count,
    }
}

fn sq_exp(d2: f64, l: f64) -> f64 {
    (-d2 / (l * l)).exp()
}

/// Dense correlation matrices of the instance at length-scale `l`.
fn spatial_corr(l: f64) -> DMatrix<f64> {
    DMatrix::from_fn(2, 2, |i, j| {
        let d2 = (COORDS[i][0] - COORDS[j][0]).powi(2) + (COORDS[i][1] - COORDS[j][1]).powi(2);
        sq_exp(d2, l)
    })
}

fn temporal_corr(l: f64) -> DMatrix<f64> {
    DMatrix::from_fn(2, 2, |i, j| sq_exp((TIMES[i] - TIMES[j]).powi(2), l))
}

/// Rows entering a component, its κ and its weights.
fn active(s: &ChainState<f64>, c: Component) -> Vec<(usize, f64, f64)> {
    (0..5)
        .filter_map(|j| match c {
            Component::Binary => {
                let k = if s.at_risk[j] { 0.5 } else { -0.5 };
                Some((j, k, s.omega_binary[j]))
            }
            Component::Count => s.at_risk[j].then(|| (j, (Y[j] as f64 - s.r) / 2.0, s.omega_count[j])),
        })
        .collect()
}

/// Dense `(Q, h)` of the joint `[coef; spatial; temporal]` conditional.
pub fn dense_block_oracle(s: &ChainState<f64>, c: Component) -> (DMatrix<f64>, DVector<f64>) {
    let comp = comp_state(s, c);
    let priors = five_obs_priors();
    let prior = match c {
        Component::Binary => priors.coef_binary,
        Component::Count => priors.coef_count,
    };
    let mut q = DMatrix::zeros(6, 6);
    let mut h = DVector::zeros(6);
    for i in 0..2 {
        q[(i, i)] = 1.0 / prior.variance[i];
        h[i] = prior.mean[i] / prior.variance[i];
    }
    let rs = spatial_corr(comp.spatial_kernel.l).try_inverse().unwrap() / comp.spatial_kernel.sigma.powi(2);
    let rt = temporal_corr(comp.temporal_kernel.l).try_inverse().unwrap() / comp.temporal_kernel.sigma.powi(2);
    q.view_mut((2, 2), (2, 2)).copy_from(&rs);
    q.view_mut((4, 4), (2, 2)).copy_from(&rt);
    for (j, kappa, omega) in active(s, c) {
        let mut v = DVector::zeros(6);
        v[0] = 1.0;
        v[1] = X1[j];
        v[2 + LOC[j]] = 1.0;
        v[4 + TIME[j]] = 1.0;
        let offset = comp.spatial_noise[LOC[j]] + comp.temporal_noise[TIME[j]];
        q += omega * &v * v.transpose();
        h += (kappa - omega * offset) * v;
    }
    (q, h)
}

/// Closed-form `(mean, variance)` of each noise element.
pub fn noise_oracle(s: &ChainState<f64>, c: Component, a: Axis) -> Vec<(f64, f64)> {
    let comp = comp_state(s, c);
    let (len, index, sd) = match a {
        Axis::Spatial => (2, &LOC, comp.spatial_noise_sd),
        Axis::Temporal => (2, &TIME, comp.temporal_noise_sd),
    };
    let mut out = Vec::new();
    for k in 0..len {
        let mut prec = 1.0 / (sd * sd);
        let mut lin = 0.0;
        for (j, kappa, omega) in active(s, c) {
            if index[j] != k {
                continue;
            }
            let rest = comp.coef[0]
                + comp.coef[1] * X1[j]
                + comp.spatial[LOC[j]]
                + comp.temporal[TIME[j]]
                + match a {
                    Axis::Spatial => comp.temporal_noise[TIME[j]],
                    Axis::Temporal => comp.spatial_noise[LOC[j]],
                };
            prec += omega;
            lin += kappa - omega * rest;
        }
        out.push((lin / prec, 1.0 / prec));
    }
    out
}

/// Compares sample moments of `draws` against `(mean, cov)` within `k`
/// standard errors, elementwise.
pub fn moments_within(name: &str, draws: &[Vec<f64>], mean: &DVector<f64>, cov: &DMatrix<f64>, k: f64) -> Check {
    let n = draws.len() as f64;
    let d = mean.len();
    let mut m = DVector::<f64>::zeros(d);
    for v in draws {
        m += DVector::from_column_slice(v);
    }
    m /= n;
    let mut c = DMatrix::<f64>::zeros(d, d);
    for v in draws {
        let e = DVector::from_column_slice(v) - &m;
        c += &e * e.transpose();
    }
    c /= n - 1.0;
    let mut worst = 0.0f64;
    let mut what = String::new();
    for i in 0..d {
        let z = (m[i] - mean[i]).abs() / (cov[(i, i)] / n).sqrt();
        if z > worst {
            worst = z;
            what = format!("mean[{i}] {:.5} vs {:.5}", m[i], mean[i]);
        }
        for j in 0..=i {
            let se = ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)].powi(2)) / n).sqrt();
            let z = (c[(i, j)] - cov[(i, j)]).abs() / se;
            if z > worst {
                worst = z;
                what = format!("cov[{i},{j}] {:.5} vs {:.5}", c[(i, j)], cov[(i, j)]);
            }
        }
    }
    Check::new(name, worst < k, format!("largest deviation {worst:.2} SE ({what})"))
}

/// Inverse-gamma CDF through the regularized upper incomplete gamma.
pub fn inverse_gamma_cdf(shape: f64, rate: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| if x <= 0.0 { 0.0 } else { gamma_ur(shape, rate / x) }
}

pub fn block_checks(draws: usize, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut r = rng(seed);
    for c in [Component::Binary, Component::Count] {
        let mut s = five_obs_sampler(true);
        let (q_oracle, h_oracle) = dense_block_oracle(s.state(), c);
        let (q, h) = s.block_posterior(c).unwrap();
        let mut err = 0.0f64;
        for i in 0..6 {
            err = err.max((h[i] - h_oracle[i]).abs());
            for j in 0..6 {
                err = err.max((q[(i, j)] - q_oracle[(i, j)]).abs());
            }
        }
        out.push(Check::new(
            format!("{c:?} block precision and linear term"),
            err < 1e-12,
            format!("max abs error {err:.2e}"),
        ));
        let cov = q_oracle.clone().try_inverse().unwrap();
        let mean = &cov * &h_oracle;
        let samples: Vec<Vec<f64>> = (0..draws)
            .map(|_| {
                s.draw_block(c, &mut r).unwrap();
                let st = comp_state(s.state(), c);
                [st.coef.as_slice(), &st.spatial, &st.temporal].concat()
            })
            .collect();
        out.push(moments_within(&format!("{c:?} block draw moments"), &samples, &mean, &cov, 4.0));
    }
    out
}

pub fn noise_checks(draws: usize, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut r = rng(seed);
    for c in [Component::Binary, Component::Count] {
        for a in [Axis::Spatial, Axis::Temporal] {
            let mut s = five_obs_sampler(true);
            let oracle = noise_oracle(s.state(), c, a);
            let mean = DVector::from_iterator(2, oracle.iter().map(|o| o.0));
            let cov = DMatrix::from_diagonal(&DVector::from_iterator(2, oracle.iter().map(|o| o.1)));
            let samples: Vec<Vec<f64>> = (0..draws)
                .map(|_| {
                    s.update_noise(c, a, &mut r).unwrap();
                    let st = comp_state(s.state(), c);
                    match a {
                        Axis::Spatial => st.spatial_noise.clone(),
                        Axis::Temporal => st.temporal_noise.clone(),
                    }
                })
                .collect();
            out.push(moments_within(&format!("{c:?} {a:?} noise draw moments"), &samples, &mean, &cov, 4.0));
        }
    }
    out
}

/// KS tests of every inverse-gamma update against its CDF, with
/// parameters computed from the dense correlation.
pub fn inverse_gamma_checks(draws: usize, seed: u64, alpha: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut r = rng(seed);
    let priors = five_obs_priors();
    for c in [Component::Binary, Component::Count] {
        for a in [Axis::Spatial, Axis::Temporal] {
            let mut s = five_obs_sampler(true);
            let comp = comp_state(s.state(), c).clone();
            let (w, corr, shape0, rate0) = match a {
                Axis::Spatial => (&comp.spatial, spatial_corr(comp.spatial_kernel.l), priors.a_sigma1, priors.b_sigma1),
                Axis::Temporal => (&comp.temporal, temporal_corr(comp.temporal_kernel.l), priors.a_sigma2, priors.b_sigma2),
            };
            let wv = DVector::from_column_slice(w);
            let quad = (wv.transpose() * corr.try_inverse().unwrap() * &wv)[0];
            let (shape, rate) = (shape0 + 1.0, rate0 + quad / 2.0);
            let x: Vec<f64> = (0..draws)
                .map(|_| {
                    s.update_process(c, a, &mut r).unwrap();
                    let st = comp_state(s.state(), c);
                    match a {
                        Axis::Spatial => st.spatial_kernel.sigma.powi(2),
                        Axis::Temporal => st.temporal_kernel.sigma.powi(2),
                    }
                })
                .collect();
            let ks = ks_one_sample(&x, inverse_gamma_cdf(shape, rate));
            out.push(Check::new(
                format!("{c:?} {a:?} GP variance vs IG CDF"),
                ks.p_value > alpha,
                format!("D = {:.4}, p = {:.4}", ks.statistic, ks.p_value),
            ));

            let noise = match a {
                Axis::Spatial => &comp.spatial_noise,
                Axis::Temporal => &comp.temporal_noise,
            };
            let ss: f64 = noise.iter().map(|v| v * v).sum();
            let (shape, rate) = (priors.a_eps + 1.0, priors.b_eps + ss / 2.0);
            let x: Vec<f64> = (0..draws)
                .map(|_| {
                    s.update_noise_variance(c, a, &mut r).unwrap();
                    let st = comp_state(s.state(), c);
                    match a {
                        Axis::Spatial => st.spatial_noise_sd.powi(2),
                        Axis::Temporal => st.temporal_noise_sd.powi(2),
                    }
                })
                .collect();
            let ks = ks_one_sample(&x, inverse_gamma_cdf(shape, rate));
            out.push(Check::new(
                format!("{c:?} {a:?} noise variance vs IG CDF"),
                ks.p_value > alpha,
                format!("D = {:.4}, p = {:.4}", ks.statistic, ks.p_value),
            ));
        }
    }
    out
}
