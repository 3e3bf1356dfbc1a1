use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("zero alongship variance")]
    ZeroAlongshipVariance,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty dwell")]
    EmptyDwell,
    #[error("too few valid samples: need {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },
    #[error("no wave line")]
    NoWaveLine,
    #[error("aspect unobservable")]
    AspectUnobservable,
    #[error("insufficient frames")]
    InsufficientFrames,
}

pub type Result<T> = std::result::Result<T, CoreError>;
