use thiserror::Error;

/// Errors produced by state-space construction, matrix math, training and
/// analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("malformed layout: {0}")]
    Format(String),

    #[error("maze layout contains no valid cells")]
    EmptyMaze,

    #[error("invalid lexicon: {0}")]
    Lexicon(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("wrong state-space kind: expected {expected}, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not symmetric: max asymmetry {0:e}")]
    Asymmetric(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("state {state} out of range for {n_states} states")]
    StateOutOfRange { state: usize, n_states: usize },

    #[error("state {0} is not a valid (free) cell")]
    InvalidState(usize),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("clustering undefined: {0}")]
    UndefinedClustering(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
