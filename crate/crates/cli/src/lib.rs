//! Pipeline driver: feature extraction, noise synthesis, training, scoring, fusion and
//! reporting over a directory-per-label clip tree, with content-hash stage caching.

pub mod cache;
pub mod config;
mod error;
pub mod fixture;
pub mod pipeline;
pub mod selftest;

pub use config::{FeatureName, PipelineConfig};
pub use error::{CliError, Result};
pub use pipeline::{Pipeline, StageReport};
