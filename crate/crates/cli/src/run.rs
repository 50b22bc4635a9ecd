use std::path::{Path, PathBuf};

use chrono::Utc;

use crate::commands;
use crate::config::{ExperimentConfig, Parameters, SchemaError};
use crate::manifest::{sha256_hex, Artifacts, CheckResult, RunManifest, RunStatus, MANIFEST_NAME};
use crate::plot::PlotError;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Config(Vec<SchemaError>),
    #[error("output directory: {0}")]
    OutputDir(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("plot: {0}")]
    Plot(#[from] PlotError),
    #[error("sl: {0}")]
    Sl(#[from] fracsl::sl::SlError),
    #[error("mittleff: {0}")]
    Ml(#[from] fracsl::mittleff::MlError),
    #[error("forward: {0}")]
    Forward(#[from] fracsl::forward::ForwardError),
    #[error("weyl_toolkit: {0}")]
    Weyl(#[from] fracsl::weyl::WeylError),
    #[error("uniqueness: {0}")]
    Uniqueness(#[from] fracsl::uniqueness::UniquenessError),
    #[error("inverse: {0}")]
    Inverse(#[from] fracsl::inverse::InverseError),
}

impl RunError {
    pub fn status(&self) -> RunStatus {
        match self {
            RunError::Config(_) | RunError::OutputDir(_) | RunError::Io(_) => RunStatus::ConfigError,
            _ => RunStatus::NumericalFailure,
        }
    }
}

/// Creates `dir` if needed and insists that it is empty, so that after the
/// run every file in it is one the manifest lists.
fn claim_output_dir(dir: &Path) -> Result<(), RunError> {
    if dir.exists() {
        if !dir.is_dir() {
            return Err(RunError::OutputDir(format!("{} is not a directory", dir.display())));
        }
        let mut entries = std::fs::read_dir(dir)?;
        if entries.next().is_some() {
            return Err(RunError::OutputDir(format!("{} is not empty", dir.display())));
        }
    } else {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Executes one experiment and writes its manifest.
///
/// Configuration and output-directory problems are returned as errors and
/// leave no manifest. A failure inside a library pipeline is recorded in the
/// manifest with [`RunStatus::NumericalFailure`] and the originating error.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, RunError> {
    claim_output_dir(out_dir)?;
    let started = Utc::now();
    let mut artifacts = Artifacts::new(out_dir);
    let outcome = dispatch(config, &mut artifacts);
    let (checks, status, error) = match outcome {
        Ok(checks) => {
            let status = if checks.iter().all(|c| c.pass) { RunStatus::Pass } else { RunStatus::CheckFailure };
            (checks, status, None)
        }
        Err(e) => (Vec::new(), e.status(), Some(e.to_string())),
    };
    let manifest = RunManifest {
        command: config.command.as_str().to_string(),
        seed: config.seed,
        config_hash: sha256_hex(config.canonical_json().as_bytes()),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: Utc::now(),
        files: artifacts.into_files(),
        checks,
        status,
        error,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(out_dir.join(MANIFEST_NAME), text)?;
    Ok(manifest)
}

fn dispatch(config: &ExperimentConfig, art: &mut Artifacts) -> Result<Vec<CheckResult>, RunError> {
    match &config.parameters {
        Parameters::Eigensolve(p) => commands::eigensolve(p, art),
        Parameters::Forward(p) => commands::forward(p, art),
        Parameters::Kernel(p) => commands::kernel(p, art),
        Parameters::WeylScan(p) => commands::weyl_scan(p, art),
        Parameters::Counting(p) => commands::counting(p, art),
        Parameters::RegionMap(p) => commands::region_map(p, art),
        Parameters::Reconstruct(p) => commands::reconstruct(p, config.seed, art),
        Parameters::Distinguish(p) => commands::distinguish(p, config.seed, art),
        Parameters::VerifyAll(p) => commands::verify_all(p, art),
    }
}

/// Parses, applies command-line overrides and runs. Returns the manifest when
/// one was written, and the process exit code.
pub fn run_text(
    config_text: &str,
    out_override: Option<&Path>,
    seed_override: Option<u64>,
) -> (Option<RunManifest>, Result<i32, RunError>) {
    let mut config = match ExperimentConfig::parse(config_text) {
        Ok(c) => c,
        Err(errors) => return (None, Err(RunError::Config(errors))),
    };
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let out: Option<PathBuf> = out_override.map(Path::to_path_buf).or_else(|| config.output_dir.clone());
    let Some(out) = out else {
        return (
            None,
            Err(RunError::Config(vec![SchemaError {
                path: "output_dir".into(),
                message: "no output directory given (use --out or output_dir)".into(),
            }])),
        );
    };
    match run(&config, &out) {
        Ok(m) => {
            let code = m.exit_code();
            (Some(m), Ok(code))
        }
        Err(e) => (None, Err(e)),
    }
}
