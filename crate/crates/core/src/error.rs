use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A sizing parameter falls outside the configured limits.
    #[error("configuration error: {0}")]
    Config(String),

    /// The request is well-formed but beyond what this build supports
    /// (qubit count over a dense-oracle cap, term arity, ...).
    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The per-angle minimizer ran out of evaluations.
    #[error("minimizer did not converge after {evaluations} evaluations")]
    NotConverged { evaluations: usize, best_angles: Vec<f64> },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl SimError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        SimError::Argument(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        SimError::Capability(msg.into())
    }
}
