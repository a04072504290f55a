//! Config-driven runner for the quench, BCS and correlation experiments.
//!
//! ```text
//! qmatsim <quench|bcs|correlate> --config run.toml [--seed N] [--out path]
//! ```

pub mod config;
pub mod error;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::{parse_config, Experiment, RunConfig};
pub use error::CliError;
pub use run::{run, Artifacts};

/// Environment variable overriding the worker-thread count.
pub const WORKERS_ENV: &str = "QMATSIM_WORKERS";

/// Sizes the global thread pool from [`WORKERS_ENV`] when it is set.
pub fn init_workers_from_env() -> Result<Option<usize>, CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else { return Ok(None) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size worker pool: {e}")))?;
    Ok(Some(n))
}

/// Reads `config_path`, applies the flag overrides and runs the experiment.
pub fn execute(
    experiment: Experiment,
    config_path: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<Artifacts, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let mut cfg = parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", config_path.display())),
        other => other,
    })?;
    if cfg.experiment != experiment {
        return Err(CliError::Config(format!(
            "{}: requested `{experiment}` but the file holds a [{}] block",
            config_path.display(),
            cfg.experiment
        )));
    }
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    let out: PathBuf = match (out, &cfg.output) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => PathBuf::from(format!("{experiment}.csv")),
    };
    run(&cfg, &out)
}
