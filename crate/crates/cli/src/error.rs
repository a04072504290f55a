use std::io;
use std::path::PathBuf;

use qmatsim_core::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("gap iteration did not converge within {iterations} iterations (residual {residual:e}); results written")]
    NotConverged { iterations: usize, residual: f64 },
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit status: 2 configuration, 3 capability, 4 numerical, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 1,
            CliError::NotConverged { .. } => 4,
            CliError::Sim(e) => match e {
                SimError::Argument(_) | SimError::Config(_) => 2,
                SimError::Capability(_) => 3,
                SimError::Numerical(_) | SimError::NotConverged { .. } | SimError::Consistency(_) => 4,
            },
        }
    }
}
