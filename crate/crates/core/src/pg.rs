//! Pólya-Gamma random variates.
//!
//! `PG(1, c)` is drawn exactly with Devroye's alternating-series rejection
//! sampler on the tilted Jacobi density. A general shape `b` is split into
//! `⌊b⌋` exact `PG(1, c)` draws plus a fractional remainder drawn from the
//! truncated sum-of-gammas representation
//!
//! ```text
//! ω = 1/(2π²) Σ_{k=1..K} g_k / ((k - 1/2)² + c²/(4π²)),   g_k ~ Gamma(b_frac, 1)
//! ```
//!
//! with the exact mean of the discarded tail added back. Shapes above
//! [`NORMAL_APPROX_SHAPE`] use a moment-matched normal draw.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Terms kept in the sum-of-gammas representation of a fractional shape.
pub const GAMMA_SUM_TERMS: usize = 200;

/// Above this shape the draw is a moment-matched normal.
pub const NORMAL_APPROX_SHAPE: f64 = 170.0;

const TRUNC: f64 = 0.64;
const TRUNC_RECIP: f64 = 1.0 / TRUNC;

/// Shape and tilt of a Pólya-Gamma distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PgParams<T> {
    pub b: T,
    pub c: T,
}

impl<T: Real> PgParams<T> {
    pub fn new(b: T, c: T) -> Result<Self> {
        if !(b > T::zero()) || !b.is_finite() {
            return Err(Error::Domain(format!("PG shape must be positive, got {b}")));
        }
        if !c.is_finite() {
            return Err(Error::Domain(format!("PG tilt must be finite, got {c}")));
        }
        Ok(Self { b, c })
    }
}

/// `E[PG(b, c)] = b/(2c) tanh(c/2)`, `b/4` at `c = 0`.
pub fn pg_mean(b: f64, c: f64) -> f64 {
    let c = c.abs();
    if c < 1e-6 {
        b * (0.25 - c * c / 48.0)
    } else {
        b * (0.5 * c).tanh() / (2.0 * c)
    }
}

/// `Var[PG(b, c)] = b/(4c³) (sinh c − c) sech²(c/2)`, `b/24` at `c = 0`.
pub fn pg_variance(b: f64, c: f64) -> f64 {
    let c = c.abs();
    if c < 1e-3 {
        b * (1.0 / 24.0 - c * c / 120.0)
    } else if c > 700.0 {
        // sinh overflows; sech² (c/2) sinh(c) -> 2
        b * (2.0 - 4.0 * c * (-c).exp()) / (4.0 * c * c * c)
    } else {
        let sech = 1.0 / (0.5 * c).cosh();
        b * (c.sinh() - c) * sech * sech / (4.0 * c * c * c)
    }
}

/// Pólya-Gamma distribution, usable with `rand`'s `Distribution` trait.
#[derive(Clone, Copy, Debug)]
pub struct PolyaGamma {
    b: f64,
    c: f64,
}

impl PolyaGamma {
    pub fn new(b: f64, c: f64) -> Result<Self> {
        let p = PgParams::new(b, c)?;
        Ok(Self { b: p.b, c: p.c })
    }
}

impl Distribution<f64> for PolyaGamma {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        draw(self.b, self.c, rng)
    }
}

/// One draw from `PG(b, c)`.
pub fn sample_pg<T: Real, R: Rng + ?Sized>(params: PgParams<T>, rng: &mut R) -> T {
    T::of(draw(params.b.to_f64_lossy(), params.c.to_f64_lossy(), rng))
}

/// Elementwise independent draws.
pub fn sample_pg_vector<T: Real, R: Rng + ?Sized>(b: &[T], c: &[T], rng: &mut R) -> Result<Vec<T>> {
    if b.len() != c.len() {
        return Err(Error::Contract(format!(
            "PG shape and tilt lengths differ: {} vs {}",
            b.len(),
            c.len()
        )));
    }
    b.iter()
        .zip(c)
        .map(|(&bi, &ci)| PgParams::new(bi, ci).map(|p| sample_pg(p, rng)))
        .collect()
}

fn draw<R: Rng + ?Sized>(b: f64, c: f64, rng: &mut R) -> f64 {
    if b > NORMAL_APPROX_SHAPE {
        return draw_normal_approx(b, c, rng);
    }
    let whole = b.floor();
    let frac = b - whole;
    let mut total = 0.0;
    for _ in 0..(whole as usize) {
        total += draw_devroye(c, rng);
    }
    if frac > 1e-12 {
        total += draw_gamma_sum(frac, c, rng);
    }
    total
}

fn draw_normal_approx<R: Rng + ?Sized>(b: f64, c: f64, rng: &mut R) -> f64 {
    let mean = pg_mean(b, c);
    let sd = pg_variance(b, c).sqrt();
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let x = mean + sd * z;
        if x > 0.0 {
            return x;
        }
    }
}

fn draw_gamma_sum<R: Rng + ?Sized>(b: f64, c: f64, rng: &mut R) -> f64 {
    let gamma = Gamma::new(b, 1.0).expect("positive shape");
    let shift = c * c / (4.0 * PI * PI);
    let scale = 1.0 / (2.0 * PI * PI);
    let mut sum = 0.0;
    let mut kept_mean = 0.0;
    for k in 1..=GAMMA_SUM_TERMS {
        let h = k as f64 - 0.5;
        let w = 1.0 / (h * h + shift);
        sum += gamma.sample(rng) * w;
        kept_mean += w;
    }
    let tail = (pg_mean(b, c) - b * scale * kept_mean).max(0.0);
    scale * sum + tail
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Probability of the truncated-exponential branch of the proposal.
fn mass_texpon(z: f64) -> f64 {
    let t = TRUNC;
    let fz = 0.125 * PI * PI + 0.5 * z * z;
    let b = (1.0 / t).sqrt() * (t * z - 1.0);
    let a = -(1.0 / t).sqrt() * (t * z + 1.0);
    let x0 = fz.ln() + fz * t;
    let xb = x0 - z + std_normal_cdf(b).ln();
    let xa = x0 + z + std_normal_cdf(a).ln();
    let qdivp = 4.0 / PI * (xb.exp() + xa.exp());
    1.0 / (1.0 + qdivp)
}

/// Coefficient `a_n(x)` of the alternating series for the Jacobi density.
fn series_coef(n: usize, x: f64) -> f64 {
    let k = (n as f64 + 0.5) * PI;
    if x > TRUNC {
        k * (-0.5 * k * k * x).exp()
    } else if x > 0.0 {
        let h = n as f64 + 0.5;
        (-1.5 * ((0.5 * PI).ln() + x.ln()) + k.ln() - 2.0 * h * h / x).exp()
    } else {
        0.0
    }
}

/// Inverse-Gaussian with mean `1/z`, truncated to `(0, TRUNC)`.
fn truncated_inv_gauss<R: Rng + ?Sized>(z: f64, rng: &mut R) -> f64 {
    let t = TRUNC;
    let mut x = t + 1.0;
    if TRUNC_RECIP > z {
        let mut alpha = 0.0;
        while rng.random::<f64>() > alpha {
            let mut e1: f64 = rng.sample(Exp1);
            let mut e2: f64 = rng.sample(Exp1);
            while e1 * e1 > 2.0 * e2 / t {
                e1 = rng.sample(Exp1);
                e2 = rng.sample(Exp1);
            }
            x = 1.0 + e1 * t;
            x = t / (x * x);
            alpha = (-0.5 * z * z * x).exp();
        }
    } else {
        let mu = 1.0 / z;
        while x > t {
            let y: f64 = rng.sample(StandardNormal);
            let mu_y = mu * y * y;
            let half_mu = 0.5 * mu;
            x = mu + half_mu * mu_y - half_mu * (4.0 * mu_y + mu_y * mu_y).sqrt();
            if rng.random::<f64>() > mu / (mu + x) {
                x = mu * mu / x;
            }
        }
    }
    x
}

/// Exact `PG(1, c)` via `J*(1, |c|/2) / 4`.
fn draw_devroye<R: Rng + ?Sized>(c: f64, rng: &mut R) -> f64 {
    let z = 0.5 * c.abs();
    let fz = 0.125 * PI * PI + 0.5 * z * z;
    let p_exp = mass_texpon(z);
    loop {
        let x = if rng.random::<f64>() < p_exp {
            let e: f64 = rng.sample(Exp1);
            TRUNC + e / fz
        } else {
            truncated_inv_gauss(z, rng)
        };
        let mut s = series_coef(0, x);
        let y = rng.random::<f64>() * s;
        let mut n = 0;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= series_coef(n, x);
                if y <= s {
                    return 0.25 * x;
                }
            } else {
                s += series_coef(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}
