use thiserror::Error;

/// Errors raised by the estimation toolkit.
///
/// Every variant maps to a stable string code (see [`Error::code`]) so that
/// scripts driving the CLI can branch on failures without parsing messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {requested} exceeds cap {cap}")]
    Capacity { requested: String, cap: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: deviation {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("state trace {trace} deviates from 1 by more than {tol:e}")]
    StateTrace { trace: f64, tol: f64 },

    #[error("state has negative eigenvalue {min_eigenvalue:e} (tolerance {tol:e})")]
    StateNotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("numerical check failed: {0}")]
    Numeric(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("position {position} out of range 1..={copies}")]
    PositionOutOfRange { position: usize, copies: usize },

    #[error("POVM element {index} has min eigenvalue {min_eigenvalue:e} below -{tol:e}")]
    PovmNotPsd { index: usize, min_eigenvalue: f64, tol: f64 },

    #[error("POVM completeness residual {residual:e} exceeds {tol:e}")]
    PovmCompleteness { residual: f64, tol: f64 },

    #[error("POVM has no outcomes")]
    PovmEmpty,

    #[error("outcome value {value} at index {index} is not finite")]
    PovmValue { index: usize, value: f64 },

    #[error("outcome {index} has probability {probability:e} below the clamping floor")]
    NegativeProbability { index: usize, probability: f64 },

    #[error("POVM is biased: first-moment residual {residual:e} exceeds {tol:e}")]
    Biased { residual: f64, tol: f64 },

    #[error("value {value} outside allowed range [{lo}, {hi}]")]
    ValueRange { value: f64, lo: f64, hi: f64 },

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("copy count must be at least 1")]
    ZeroCopies,

    #[error("ill-conditioned probe system: {0}")]
    Conditioning(String),

    #[error("no unbiased POVM found on the value grid: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DIM_MISMATCH",
            Error::Capacity { .. } => "DIM_CAP",
            Error::NotSquare { .. } => "NOT_SQUARE",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::NotHermitian { .. } => "NOT_HERMITIAN",
            Error::StateTrace { .. } => "STATE_TRACE",
            Error::StateNotPsd { .. } => "STATE_PSD",
            Error::NoConvergence(_) => "NO_CONVERGENCE",
            Error::Numeric(_) => "NUMERIC",
            Error::InvalidPermutation(_) => "BAD_PERMUTATION",
            Error::PositionOutOfRange { .. } => "POSITION_RANGE",
            Error::PovmNotPsd { .. } => "POVM_PSD",
            Error::PovmCompleteness { .. } => "POVM_COMPLETENESS",
            Error::PovmEmpty => "POVM_EMPTY",
            Error::PovmValue { .. } => "POVM_VALUE",
            Error::NegativeProbability { .. } => "NEGATIVE_PROBABILITY",
            Error::Biased { .. } => "POVM_BIASED",
            Error::ValueRange { .. } => "VALUE_RANGE",
            Error::ZeroShots => "ZERO_SHOTS",
            Error::ZeroCopies => "ZERO_COPIES",
            Error::Conditioning(_) => "CONDITIONING",
            Error::Infeasible(_) => "INFEASIBLE",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::UnknownPreset(_) => "UNKNOWN_PRESET",
            Error::Parse(_) => "PARSE",
            Error::Io(_) => "IO",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
