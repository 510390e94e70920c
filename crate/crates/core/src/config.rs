//! The TOML run configuration: input schema, priors, chain options and an
//! optional simulation design.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::ChainConfig;
use crate::model::{CsvSchema, PriorSpec};
use crate::scalar::Real;
use crate::simgen::SimDesign;

/// Every section is optional; missing sections take their defaults.
///
/// ```toml
/// [schema]
/// covariates = ["x1", "x2"]
///
/// [priors]
/// a_sigma1 = 2.0
/// b_sigma1 = 1.0
///
/// [chain]
/// n_iter = 4000
/// burn_in = 2000
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default, deny_unknown_fields)]
pub struct RunConfig<T: Real> {
    pub schema: CsvSchema,
    pub priors: PriorSpec<T>,
    pub chain: ChainConfig,
    pub design: Option<SimDesign>,
}

impl<T: Real> Default for RunConfig<T> {
    fn default() -> Self {
        Self {
            schema: CsvSchema::default(),
            priors: PriorSpec::default(),
            chain: ChainConfig::default(),
            design: None,
        }
    }
}

impl<T: Real> RunConfig<T> {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.priors.validate()?;
        self.chain.validate()?;
        if let Some(d) = &self.design {
            d.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: RunConfig<f64> = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn sections_override_defaults() {
        let c: RunConfig<f64> = RunConfig::from_toml(
            "[chain]\nn_iter = 30\nburn_in = 10\n[priors]\na_eps = 2.0\n[schema]\ncovariates = [\"u\", \"v\"]\n",
        )
        .unwrap();
        assert_eq!(c.chain.n_iter, 30);
        assert_eq!(c.priors.a_eps, 2.0);
        assert_eq!(c.schema.covariates, vec!["u", "v"]);
        assert_eq!(c.priors.neighbors, 13);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        assert!(matches!(RunConfig::<f64>::from_toml("[chain]\nn_iters = 3\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::<f64>::from_toml("[chain]\nthin = 0\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::<f64>::from_toml("[priors]\na_eps = -1.0\n"), Err(Error::Config(_))));
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c: RunConfig<f64> = RunConfig::default();
        c.design = Some(SimDesign::sim3());
        c.chain.ordering = crate::nngp::OrderingRule::Random(7);
        c.priors.r_max = Some(10.0);
        let back: RunConfig<f64> = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
