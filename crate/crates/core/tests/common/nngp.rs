//! Nearest-neighbor factor against dense Gaussian algebra.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{rng, Check};
use zinb_nngp::nngp::{build_neighbor_sets, gp_log_density, KernelParams, NngpFactor, OrderingRule, Points, SqExpCorrelation};

pub const REL: f64 = 1e-8;
pub const ABS: f64 = 1e-6;

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ABS.max(REL * b.abs())
}

/// A random instance: points in the unit square, length-scale, sd and a
/// test vector.
pub struct Instance {
    pub coords: Vec<[f64; 2]>,
    pub kp: KernelParams<f64>,
    pub w: Vec<f64>,
}

pub fn instance(seed: u64) -> Instance {
    let mut r = rng(seed);
    let s = r.random_range(2..=50);
    let coords = (0..s).map(|_| [r.random::<f64>(), r.random::<f64>()]).collect();
    let kp = KernelParams { sigma: r.random_range(0.3..2.0), l: r.random_range(0.05..0.25) };
    let w = (0..s).map(|_| StandardNormal.sample(&mut r)).collect();
    Instance { coords, kp, w }
}

pub struct Dense {
    pub quad_form: f64,
    pub log_det: f64,
    pub log_density: f64,
}

pub fn dense_oracle(inst: &Instance) -> Dense {
    let n = inst.coords.len();
    let l2 = inst.kp.l * inst.kp.l;
    let rho = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (inst.coords[i], inst.coords[j]);
        (-((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)) / l2).exp()
    });
    let chol = rho.cholesky().expect("dense correlation is positive definite");
    let w = DVector::from_column_slice(&inst.w);
    let quad_form = w.dot(&chol.solve(&w));
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let s2 = inst.kp.sigma * inst.kp.sigma;
    let log_density = -0.5 * (n as f64 * (std::f64::consts::TAU * s2).ln() + log_det + quad_form / s2);
    Dense { quad_form, log_det, log_density }
}

pub fn factor(inst: &Instance, m: usize, rule: OrderingRule) -> NngpFactor<f64> {
    let p = Points::planar(&inst.coords);
    let sets = build_neighbor_sets(&p, m, rule).unwrap();
    NngpFactor::build(&p, &sets, &SqExpCorrelation::new(inst.kp.l).unwrap()).unwrap()
}

/// 100 instances with m = S − 1; one check per quantity plus runtime.
pub fn exactness_suite(limit_secs: f64) -> Vec<Check> {
    let start = Instant::now();
    let mut worst = [0.0f64; 3];
    let mut failures = [0usize; 3];
    for seed in 0..100 {
        let inst = instance(500 + seed);
        let f = factor(&inst, inst.coords.len() - 1, OrderingRule::CoordinateSum);
        let d = dense_oracle(&inst);
        let got = [
            f.quad_form(&inst.w).unwrap(),
            f.log_det().unwrap(),
            gp_log_density(&inst.w, &inst.kp, &f).unwrap(),
        ];
        for (k, (g, e)) in got.iter().zip([d.quad_form, d.log_det, d.log_density]).enumerate() {
            worst[k] = worst[k].max((g - e).abs() / e.abs().max(1.0));
            if !close(*g, e) {
                failures[k] += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut checks: Vec<Check> = ["quad_form", "log_det", "gp_log_density"]
        .iter()
        .enumerate()
        .map(|(k, name)| {
            Check::new(
                format!("NNGP exactness {name}"),
                failures[k] == 0,
                format!("{} of 100 outside tolerance, worst scaled error {:.2e}", failures[k], worst[k]),
            )
        })
        .collect();
    checks.push(Check::new("NNGP exactness runtime", secs < limit_secs, format!("{secs:.2} s (limit {limit_secs} s)")));
    checks
}
