use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("degenerate orbital basis: pivot norm {norm:e} for orbital {index}")]
    DegenerateBasis { index: usize, norm: f64 },
    #[error("inconsistent state: {0}")]
    InconsistentState(String),
    #[error("propagation failed at t = {time}: {reason}")]
    PropagationFailure { time: f64, reason: String },
    #[error("no oscillation found in the series")]
    NoOscillation,
    #[error("correlation fraction undefined: zero reference correlation energy")]
    UndefinedFraction,
    #[error("dense oracle refused: dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: u64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
