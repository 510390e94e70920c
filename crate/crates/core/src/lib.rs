//! Zero-inflated negative-binomial regression with spatial and temporal
//! Gaussian-process random effects, fitted by a Pólya-Gamma Gibbs sampler
//! with nearest-neighbor GP precision factors.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the precision for the common types.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod gibbs;
pub mod linalg;
pub mod model;
pub mod nngp;
pub mod pg;
pub mod scalar;
pub mod simgen;
pub mod summarize;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PanelDatasetF64 = model::PanelDataset<f64>;
pub type PanelDatasetF32 = model::PanelDataset<f32>;
pub type ChainStateF64 = model::ChainState<f64>;
pub type ChainStateF32 = model::ChainState<f32>;
pub type PriorSpecF64 = model::PriorSpec<f64>;
pub type PriorSpecF32 = model::PriorSpec<f32>;
pub type SamplerF64 = gibbs::Sampler<f64>;
pub type SamplerF32 = gibbs::Sampler<f32>;
pub type PosteriorSamplesF64 = gibbs::PosteriorSamples<f64>;
pub type PosteriorSamplesF32 = gibbs::PosteriorSamples<f32>;
pub type RunConfigF64 = config::RunConfig<f64>;
pub type RunConfigF32 = config::RunConfig<f32>;
