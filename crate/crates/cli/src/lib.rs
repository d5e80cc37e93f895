//! Experiment runner for successor-representation learning: orchestrates
//! the exploration, navigation, and language pipelines and writes
//! reproducible artifact bundles (CSV matrices, heatmaps, embeddings,
//! manifests).

pub mod commands;
pub mod error;
pub mod manifest;
pub mod render;

pub use error::{CliError, Result};
