//! Per-iteration cost as the number of locations grows.

use std::time::Instant;

use super::{rng, Check};
use zinb_nngp::gibbs::{Axis, ChainConfig, Sampler};
use zinb_nngp::model::PriorSpec;
use zinb_nngp::simgen::{simulate_dataset, SimDesign};

pub const SIZES: [usize; 3] = [100, 200, 500];

pub struct Timing {
    pub s: usize,
    pub build_secs: f64,
    pub sweep_secs: f64,
    pub nngp: bool,
    pub block_dim: usize,
    pub factor_nnz: usize,
}

/// Builds a sampler at `s` locations and 10 times and times `sweeps`
/// sweeps after one warm-up sweep.
pub fn time_size(s: usize, sweeps: usize) -> Timing {
    let design = SimDesign { n_locations: s, n_times: 10, ..SimDesign::sim1() };
    let (data, _) = simulate_dataset::<f64>(&design).unwrap();
    let mut r = rng(s as u64);
    let start = Instant::now();
    let config = ChainConfig { n_iter: sweeps + 2, burn_in: 1, ..ChainConfig::default() };
    let mut sampler = Sampler::new(data, PriorSpec::default(), config, &mut r).unwrap();
    let build_secs = start.elapsed().as_secs_f64();
    sampler.sweep(&mut r).unwrap();
    let start = Instant::now();
    for _ in 0..sweeps {
        sampler.sweep(&mut r).unwrap();
    }
    Timing {
        s,
        build_secs,
        sweep_secs: start.elapsed().as_secs_f64() / sweeps as f64,
        nngp: sampler.structure(Axis::Spatial).is_nngp(),
        block_dim: sampler.block_system().dim(),
        factor_nnz: sampler.block_system().factor_nnz(),
    }
}

/// Least-squares slope of `log y` on `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / lx.len() as f64, ly.iter().sum::<f64>() / ly.len() as f64);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn scaling_checks(sweeps: usize) -> Vec<Check> {
    let timings: Vec<Timing> = SIZES.iter().map(|&s| time_size(s, sweeps)).collect();
    let xs: Vec<f64> = timings.iter().map(|t| t.s as f64).collect();
    let ys: Vec<f64> = timings.iter().map(|t| t.sweep_secs).collect();
    let slope = log_log_slope(&xs, &ys);
    let largest = timings.last().unwrap();
    let dense = largest.block_dim * (largest.block_dim + 1) / 2;
    vec![
        Check::new(
            "scalability S=500 uses the sparse factor",
            timings.iter().all(|t| t.nngp) && largest.factor_nnz < dense / 2,
            format!(
                "NNGP at all sizes: {}; block factor nnz {} of {} dense entries, built in {:.3} s",
                timings.iter().all(|t| t.nngp),
                largest.factor_nnz,
                dense,
                largest.build_secs
            ),
        ),
        Check::new(
            "scalability log-log slope < 1.7",
            slope < 1.7,
            format!(
                "slope {slope:.2}; per-sweep {}",
                timings.iter().map(|t| format!("S={}: {:.4} s", t.s, t.sweep_secs)).collect::<Vec<_>>().join(", ")
            ),
        ),
    ]
}
