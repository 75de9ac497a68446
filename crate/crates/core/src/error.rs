use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid composite space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("states or operators live on different spaces: {left:?} vs {right:?}")]
    SpaceMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("subsystem index {index} invalid for a space with {count} subsystems")]
    SubsystemIndex { index: usize, count: usize },

    #[error("duplicate subsystem index {0}")]
    DuplicateSubsystem(usize),

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("operator is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state has amplitude {amplitude:e} on a level the operation cannot act on: {what}")]
    ForbiddenAmplitude { what: String, amplitude: f64 },

    #[error("state norm underflow after a quantum jump")]
    NormUnderflow,

    #[error("squared norm increased during no-jump evolution ({before} -> {after})")]
    NormIncrease { before: f64, after: f64 },

    #[error("empty trajectory ensemble")]
    EmptyEnsemble,
}

pub type Result<T> = std::result::Result<T, Error>;
