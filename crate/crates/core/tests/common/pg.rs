//! Pólya-Gamma moment suite.

use std::time::Instant;

use rand_distr::Distribution;

use super::{rng, Check};
use zinb_nngp::pg::{pg_mean, pg_variance, PolyaGamma};

pub const SHAPES: [f64; 3] = [1.0, 2.0, 5.0];
pub const TILTS: [f64; 5] = [0.0, 0.5, -0.5, 3.0, -3.0];

/// Sample mean of `n` draws against the closed form, within `k` standard
/// errors of the exact variance.
pub fn mean_check(b: f64, c: f64, n: usize, k: f64, seed: u64) -> Check {
    let pg = PolyaGamma::new(b, c).unwrap();
    let mut r = rng(seed);
    let mean = (0..n).map(|_| pg.sample(&mut r)).sum::<f64>() / n as f64;
    let (m, se) = (pg_mean(b, c), (pg_variance(b, c) / n as f64).sqrt());
    let z = (mean - m) / se;
    Check::new(
        format!("PG({b}, {c}) mean"),
        z.abs() <= k,
        format!("sample {mean:.6}, exact {m:.6}, z = {z:+.2}"),
    )
}

/// The full grid at 10⁵ draws each, plus a wall-clock limit.
pub fn moment_suite(limit_secs: f64) -> Vec<Check> {
    let start = Instant::now();
    let mut checks = Vec::new();
    for (i, &b) in SHAPES.iter().enumerate() {
        for (j, &c) in TILTS.iter().enumerate() {
            checks.push(mean_check(b, c, 100_000, 4.0, 1000 + (i * 10 + j) as u64));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    checks.push(Check::new("PG moment suite runtime", secs < limit_secs, format!("{secs:.2} s (limit {limit_secs} s)")));
    checks
}
