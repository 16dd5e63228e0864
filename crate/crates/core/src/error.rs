use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("orbital {orbital} out of range 1..={m}")]
    OrbitalOutOfRange { orbital: usize, m: usize },

    #[error("determinant orbitals must be strictly increasing, got {0:?}")]
    NotStrictlyIncreasing(Vec<usize>),

    #[error("electron count mismatch: expected {expected}, found {found}")]
    ElectronCountMismatch { expected: usize, found: usize },

    #[error("rank {rank} out of range for {count} determinants")]
    RankOutOfRange { rank: u64, count: u64 },

    #[error("basis has no spin labels")]
    MissingSpinLabels,

    #[error("duplicate determinant {0}")]
    DuplicateDeterminant(String),

    #[error("state is not normalized: norm^2 = {0}")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("no builtin constraint table for n = {n}, m = {m}")]
    UnsupportedTable { n: usize, m: usize },

    #[error("constraint rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("empty determinant sector")]
    EmptySector,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
