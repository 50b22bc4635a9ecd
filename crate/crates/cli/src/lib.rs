//! Batch experiment harness for `fracsl`.
//!
//! A run reads a JSON [`config::ExperimentConfig`], dispatches to one library
//! pipeline, writes CSV/JSON/SVG artifacts into an output directory it owns,
//! and finishes with a [`manifest::RunManifest`] listing every file with its
//! SHA-256 digest plus the outcome of each embedded check.

pub mod config;
pub mod manifest;
pub mod plot;
mod commands;
mod run;

pub use config::{validate, Command, ExperimentConfig, SchemaError};
pub use manifest::{CheckResult, RunManifest, RunStatus, MANIFEST_NAME};
pub use plot::{plot, PlotError, PlotSpec};
pub use commands::random_pairs;
pub use run::{run, run_text, RunError};
