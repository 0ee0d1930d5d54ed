use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("index ({row}, {col}) out of bounds for {rows}x{cols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("cell ({row}, {col}) is unobserved")]
    CellUnobserved { row: usize, col: usize },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("evaluation set is empty")]
    EmptyEvaluation,

    #[error("ragged rows: row {row} has {found} cells, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("cannot parse cell ({row}, {col}): {text:?}")]
    Parse { row: usize, col: usize, text: String },

    #[error("bin edges must be strictly ascending with at least two edges")]
    NonAscendingEdges,

    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("spectrum is identically zero")]
    ZeroSpectrum,

    #[error("no biclique available for target ({row}, {col})")]
    NoBiclique { row: usize, col: usize },

    #[error("anchor plan violates an invariant: {0}")]
    PlanViolation(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unimplemented: {0}")]
    Unimplemented(&'static str),

    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 1 for invalid input or configuration, 2 for
    /// failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::EmptyEvaluation
            | Error::ZeroSpectrum
            | Error::NoBiclique { .. }
            | Error::Infeasible(_)
            | Error::Unimplemented(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
