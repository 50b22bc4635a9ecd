use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracsl_cli::{run_text, Command, RunStatus};

/// Run one fracsl experiment and write its artifacts and manifest.
#[derive(Parser)]
#[command(name = "fracsl", version)]
struct Args {
    /// One of: eigensolve, forward, kernel, weyl-scan, counting, region-map,
    /// reconstruct, distinguish, verify-all. Must match the config's `command`.
    command: String,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing, must be empty otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "FRACSL_THREADS";

fn config_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("configuration error: {message}");
    ExitCode::from(RunStatus::ConfigError.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return config_error(format!("{THREADS_VAR}: {e}"));
                }
            }
            _ => return config_error(format!("{THREADS_VAR} = {v:?} is not a positive integer")),
        }
    }
    if Command::parse(&args.command).is_none() {
        return config_error(format!("unknown command {:?}", args.command));
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return config_error(format!("{}: {e}", args.config.display())),
    };
    let declared = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .and_then(|v| v.get("command").and_then(|c| c.as_str()).map(str::to_string));
    if let Some(declared) = declared {
        if declared != args.command {
            return config_error(format!("command {:?} does not match config command {declared:?}", args.command));
        }
    }
    let (manifest, outcome) = run_text(&text, args.out.as_deref(), args.seed);
    match outcome {
        Ok(code) => {
            let m = manifest.expect("manifest accompanies a completed run");
            for c in &m.checks {
                println!("{} {} (value {:e}, threshold {:e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
            }
            if let Some(e) = &m.error {
                eprintln!("numerical failure: {e}");
            }
            println!("{} files written, status {:?}", m.files.len(), m.status);
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.status().exit_code() as u8)
        }
    }
}
