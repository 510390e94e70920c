//! Desk-scale recovery study: the Poisson-repetition design at S = 60,
//! T = 10, fitted with the default priors over five seeds.

use std::time::Instant;

use super::Check;
use zinb_nngp::gibbs::{chain_rng, ChainConfig, Sampler};
use zinb_nngp::model::PriorSpec;
use zinb_nngp::simgen::{simulate_dataset, SimDesign};
use zinb_nngp::summarize::{recovery_score, summarize_samples, Band};

pub const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const REQUIRED: usize = 4;

/// What one replication contributes to the checks.
#[derive(Debug, Clone)]
pub struct Replication {
    pub seed: u64,
    pub n_obs: usize,
    pub alpha1: Band,
    pub beta1: Band,
    pub r: Band,
    pub corr_binary: f64,
    pub corr_count: f64,
    pub secs: f64,
}

pub fn design(seed: u64) -> SimDesign {
    SimDesign { n_locations: 60, n_times: 10, seed, ..SimDesign::sim3() }
}

pub fn replicate(seed: u64, n_iter: usize, burn_in: usize) -> Replication {
    let start = Instant::now();
    let (data, truth) = simulate_dataset::<f64>(&design(seed)).unwrap();
    let n_obs = data.n_obs();
    let config = ChainConfig { n_iter, burn_in, seed, ..ChainConfig::default() };
    let mut rng = chain_rng(seed, 0);
    let mut sampler = Sampler::new(data, PriorSpec::default(), config, &mut rng).unwrap();
    let samples = sampler.run(&mut rng).unwrap();
    let table = summarize_samples(&samples).unwrap();
    let band = |name: &str| {
        let row = table.get(name).unwrap();
        Band { mean: row.mean, lo: row.lo, hi: row.hi }
    };
    let rep = recovery_score(&samples, &truth).unwrap();
    Replication {
        seed,
        n_obs,
        alpha1: band("alpha1"),
        beta1: band("beta1"),
        r: band("r"),
        corr_binary: rep.correlations["a"],
        corr_count: rep.correlations["c"],
        secs: start.elapsed().as_secs_f64(),
    }
}

fn tally(name: &str, reps: &[Replication], pass: impl Fn(&Replication) -> bool, show: impl Fn(&Replication) -> String) -> Check {
    let k = reps.iter().filter(|r| pass(r)).count();
    let detail = reps.iter().map(|r| format!("seed {}: {}{}", r.seed, show(r), if pass(r) { "" } else { " ✗" })).collect::<Vec<_>>();
    Check::new(name, k >= REQUIRED, format!("{k}/{} pass; {}", reps.len(), detail.join("; ")))
}

fn band(b: &Band) -> String {
    format!("{:.3} ({:.3}, {:.3})", b.mean, b.lo, b.hi)
}

/// Slope, dispersion and runtime checks.
pub fn slope_checks(reps: &[Replication], limit_secs: f64) -> Vec<Check> {
    let secs: f64 = reps.iter().map(|r| r.secs).sum();
    vec![
        tally("desk-scale alpha1 CI covers 0.25", reps, |r| r.alpha1.covers(0.25), |r| band(&r.alpha1)),
        tally("desk-scale beta1 CI covers -0.25", reps, |r| r.beta1.covers(-0.25), |r| band(&r.beta1)),
        tally("desk-scale alpha1 mean within 0.10", reps, |r| (r.alpha1.mean - 0.25).abs() <= 0.10, |r| format!("{:.3}", r.alpha1.mean)),
        tally("desk-scale beta1 mean within 0.10", reps, |r| (r.beta1.mean + 0.25).abs() <= 0.10, |r| format!("{:.3}", r.beta1.mean)),
        tally("desk-scale r CI covers 1.0", reps, |r| r.r.covers(1.0), |r| band(&r.r)),
        Check::new(
            "desk-scale runtime",
            secs < limit_secs,
            format!(
                "{secs:.0} s (limit {limit_secs:.0} s), N = {}",
                reps.iter().map(|r| r.n_obs.to_string()).collect::<Vec<_>>().join("/")
            ),
        ),
    ]
}

/// Correlation between true and posterior-mean spatial effects.
pub fn spatial_checks(reps: &[Replication]) -> Vec<Check> {
    vec![
        tally("spatial pattern binary corr >= 0.7", reps, |r| r.corr_binary >= 0.7, |r| format!("{:.3}", r.corr_binary)),
        tally("spatial pattern count corr >= 0.7", reps, |r| r.corr_count >= 0.7, |r| format!("{:.3}", r.corr_count)),
    ]
}
