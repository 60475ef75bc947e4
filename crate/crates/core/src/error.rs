use thiserror::Error;

/// A hyperparameter, target, or configuration value failed validation.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}")]
pub struct ValidationError {
    /// Name of the offending key.
    pub key: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn missing(key: &str) -> Self {
        Self::new(key, format!("missing required key: {key}"))
    }
}

/// Errors produced while sampling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Validation(#[from] ValidationError),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The target returned NaN, an infinity, or a negative value.
    #[error("target density returned {value} for particle {particle} at iteration {iteration}")]
    InvalidDensity {
        particle: usize,
        iteration: u64,
        value: f64,
    },

    #[error("entropy term undefined for density value {0}")]
    InvalidDensityValue(f64),

    #[error("{0}")]
    Metric(String),
}

impl SamplerError {
    /// True for numeric aborts caused by the target itself, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            SamplerError::InvalidDensity { .. } | SamplerError::InvalidDensityValue(_)
        )
    }
}

pub type Result<T, E = SamplerError> = std::result::Result<T, E>;
