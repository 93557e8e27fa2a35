use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix of size {size} is too large for {method} (limit {limit})")]
    TooLarge {
        method: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("particle number mismatch: input has {input}, output has {output}")]
    ParticleNumber { input: usize, output: usize },

    #[error("mode {mode} is occupied by {count} fermions")]
    MultipleOccupation { mode: usize, count: usize },

    #[error("mode index {mode} out of range 1..={n}")]
    ModeOutOfRange { mode: usize, n: usize },

    #[error("input {state} is not invariant under the permutation: cycle {cycle} has unequal occupations")]
    NotInvariant { state: String, cycle: String },

    #[error("invalid distinguishability matrix: {0}")]
    InvalidDistinguishability(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
