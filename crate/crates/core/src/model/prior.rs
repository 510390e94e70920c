use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Independent normal prior on regression coefficients. A length-one
/// vector applies to every coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CoefficientPrior<T: Real> {
    pub mean: Vec<T>,
    pub variance: Vec<T>,
}

impl<T: Real> CoefficientPrior<T> {
    pub fn isotropic(mean: T, variance: T) -> Self {
        Self {
            mean: vec![mean],
            variance: vec![variance],
        }
    }

    /// Mean and variance expanded to `p` coefficients.
    pub fn resolve(&self, p: usize) -> Result<(Vec<T>, Vec<T>)> {
        let expand = |v: &[T], what: &str| -> Result<Vec<T>> {
            match v.len() {
                1 => Ok(vec![v[0]; p]),
                n if n == p => Ok(v.to_vec()),
                n => Err(Error::Config(format!(
                    "coefficient prior {what} has {n} entries for {p} coefficients"
                ))),
            }
        };
        Ok((expand(&self.mean, "mean")?, expand(&self.variance, "variance")?))
    }
}

/// Hyperprior constants, proposal scales and the neighbor count.
///
/// Spatial processes use the `*1` constants and temporal processes the
/// `*2` constants, in both model components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default, deny_unknown_fields)]
pub struct PriorSpec<T: Real> {
    pub coef_binary: CoefficientPrior<T>,
    pub coef_count: CoefficientPrior<T>,
    /// inverse-gamma shape/rate for spatial GP variances
    pub a_sigma1: T,
    pub b_sigma1: T,
    /// inverse-gamma shape/rate for temporal GP variances
    pub a_sigma2: T,
    pub b_sigma2: T,
    /// gamma shape/rate for spatial length-scales
    pub a_l1: T,
    pub b_l1: T,
    /// gamma shape/rate for temporal length-scales
    pub a_l2: T,
    pub b_l2: T,
    /// inverse-gamma shape/rate for all noise variances
    pub a_eps: T,
    pub b_eps: T,
    /// Upper end of the uniform prior on the dispersion; unbounded if absent.
    pub r_max: Option<T>,
    pub r_proposal_sd: T,
    pub l_proposal_sd: T,
    /// nearest neighbors per point
    pub neighbors: usize,
}

impl<T: Real> Default for PriorSpec<T> {
    fn default() -> Self {
        let tiny = T::of(0.01);
        Self {
            coef_binary: CoefficientPrior::isotropic(T::zero(), T::of(100.0)),
            coef_count: CoefficientPrior::isotropic(T::zero(), T::of(100.0)),
            a_sigma1: tiny,
            b_sigma1: tiny,
            a_sigma2: tiny,
            b_sigma2: tiny,
            a_l1: T::of(2.0),
            b_l1: T::one(),
            a_l2: T::of(2.0),
            b_l2: T::one(),
            a_eps: tiny,
            b_eps: tiny,
            r_max: None,
            r_proposal_sd: T::of(0.1),
            l_proposal_sd: T::of(0.1),
            neighbors: 13,
        }
    }
}

impl<T: Real> PriorSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a_sigma1", self.a_sigma1),
            ("b_sigma1", self.b_sigma1),
            ("a_sigma2", self.a_sigma2),
            ("b_sigma2", self.b_sigma2),
            ("a_l1", self.a_l1),
            ("b_l1", self.b_l1),
            ("a_l2", self.a_l2),
            ("b_l2", self.b_l2),
            ("a_eps", self.a_eps),
            ("b_eps", self.b_eps),
            ("r_proposal_sd", self.r_proposal_sd),
            ("l_proposal_sd", self.l_proposal_sd),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if let Some(r_max) = self.r_max {
            if !(r_max > T::zero()) {
                return Err(Error::Config(format!("r_max must be positive, got {r_max}")));
            }
        }
        for (name, prior) in [("coef_binary", &self.coef_binary), ("coef_count", &self.coef_count)] {
            if prior.variance.is_empty() || prior.mean.is_empty() {
                return Err(Error::Config(format!("{name} needs a mean and a variance")));
            }
            if prior.variance.iter().any(|v| !(*v > T::zero())) {
                return Err(Error::Config(format!("{name} variances must be positive")));
            }
        }
        if self.neighbors == 0 {
            return Err(Error::Config("neighbors must be at least 1".into()));
        }
        Ok(())
    }

    /// Prior means of the spatial and temporal length-scales.
    pub fn length_scale_means(&self) -> (T, T) {
        (self.a_l1 / self.b_l1, self.a_l2 / self.b_l2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let p = PriorSpec::<f64>::default();
        p.validate().unwrap();
        assert_eq!(p.neighbors, 13);
        assert_eq!(p.length_scale_means(), (2.0, 2.0));
        let (m, v) = p.coef_binary.resolve(3).unwrap();
        assert_eq!(m, vec![0.0; 3]);
        assert_eq!(v, vec![100.0; 3]);
    }

    #[test]
    fn rejects_bad_constants() {
        let mut p = PriorSpec::<f64>::default();
        p.b_eps = 0.0;
        assert!(matches!(p.validate(), Err(Error::Config(_))));
        let mut p = PriorSpec::<f64>::default();
        p.coef_count.variance = vec![-1.0];
        assert!(p.validate().is_err());
        let prior = CoefficientPrior { mean: vec![0.0, 1.0], variance: vec![1.0] };
        assert!(prior.resolve(3).is_err());
    }

    #[test]
    fn toml_round_trip_with_partial_override() {
        let p: PriorSpec<f64> = toml::from_str("a_eps = 2.0\nneighbors = 8\n").unwrap();
        assert_eq!(p.a_eps, 2.0);
        assert_eq!(p.neighbors, 8);
        assert_eq!(p.b_eps, 0.01);
        let text = toml::to_string(&p).unwrap();
        let back: PriorSpec<f64> = toml::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
