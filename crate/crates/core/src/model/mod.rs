//! Data model shared by the sampler, simulator and summaries.

mod dataset;
mod ingest;
mod prior;
mod state;

pub use dataset::{DesignMaps, PanelDataset};
pub use ingest::{ingest_csv, write_csv, CsvSchema};
pub use prior::{CoefficientPrior, PriorSpec};
pub use state::{linear_predictors, ChainState, ComponentState};
