mod common;

use proptest::prelude::*;
use rand_distr::Distribution;

use common::{assert_all, pg::mean_check, pg::moment_suite, rng};
use zinb_nngp::diagnostics::{ks_one_sample, ks_two_sample};
use zinb_nngp::pg::{sample_pg, PgParams, PolyaGamma};

fn draws(b: f64, c: f64, n: usize, seed: u64) -> Vec<f64> {
    let pg = PolyaGamma::new(b, c).unwrap();
    let mut r = rng(seed);
    (0..n).map(|_| pg.sample(&mut r)).collect()
}

/// CDF of PG(1, 0) from the alternating series of the Jacobi distribution:
/// `4ω` has CDF `1 − Σ (−1)ⁿ 4/(π(2n+1)) exp(−(2n+1)²π²x/8)`.
fn pg10_cdf(w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let x = 4.0 * w;
    let mut tail = 0.0;
    for n in 0..5000 {
        let k = (2 * n + 1) as f64;
        let term = 4.0 / (std::f64::consts::PI * k) * (-k * k * std::f64::consts::PI.powi(2) * x / 8.0).exp();
        tail += if n % 2 == 0 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (1.0 - tail).clamp(0.0, 1.0)
}

#[test]
fn moment_grid_within_four_standard_errors() {
    assert_all(&moment_suite(10.0));
}

#[test]
fn fractional_and_large_shapes_have_exact_means() {
    let checks: Vec<_> = [(0.3, 0.0), (0.3, 2.0), (1.7, -1.0), (4.5, 0.5), (12.25, 4.0), (250.0, 1.0)]
        .iter()
        .enumerate()
        .map(|(i, &(b, c))| mean_check(b, c, 50_000, 4.0, 70 + i as u64))
        .collect();
    assert_all(&checks);
}

#[test]
fn unit_shape_matches_jacobi_cdf() {
    let x = draws(1.0, 0.0, 20_000, 3);
    let ks = ks_one_sample(&x, pg10_cdf);
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn tilt_sign_does_not_matter() {
    for (i, &(b, c)) in [(1.0, 1.5), (0.6, 2.0), (3.4, 0.7)].iter().enumerate() {
        let ks = ks_two_sample(&draws(b, c, 10_000, 10 + i as u64), &draws(b, -c, 10_000, 20 + i as u64));
        assert!(ks.p_value > 0.001, "b={b}, c={c}: {ks:?}");
    }
}

#[test]
fn shapes_add_under_convolution() {
    let (b1, b2, c) = (1.3, 2.2, 1.1);
    let a = draws(b1, c, 10_000, 40);
    let b = draws(b2, c, 10_000, 41);
    let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let ks = ks_two_sample(&sum, &draws(b1 + b2, c, 10_000, 42));
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn single_precision_draws() {
    let mut r = rng(5);
    let n = 20_000;
    let mean = (0..n).map(|_| sample_pg(PgParams::new(2.0f32, 1.0).unwrap(), &mut r) as f64).sum::<f64>() / n as f64;
    let exact = zinb_nngp::pg::pg_mean(2.0, 1.0);
    let se = (zinb_nngp::pg::pg_variance(2.0, 1.0) / n as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * se);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn draws_are_positive_and_finite(b in 0.01f64..300.0, c in -60f64..60.0, seed in 0u64..10_000) {
        let v = PolyaGamma::new(b, c).unwrap().sample(&mut rng(seed));
        prop_assert!(v > 0.0 && v.is_finite());
    }

    #[test]
    fn invalid_parameters_are_rejected(b in -5f64..=0.0) {
        prop_assert!(PolyaGamma::new(b, 1.0).is_err());
        prop_assert!(PolyaGamma::new(1.0, f64::NAN).is_err());
    }
}
