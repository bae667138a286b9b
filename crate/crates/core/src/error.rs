use thiserror::Error;

/// Errors shared by every analysis module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsacError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("target kurtosis {target} unreachable; achievable interval is [{min}, {max}]")]
    OutOfRange { target: f64, min: f64, max: f64 },

    #[error("sampling budget exceeded: {requested} sample operations requested, limit is {limit}")]
    BudgetExceeded { requested: u128, limit: u128 },

    #[error("resource element collision at symbol {symbol}, subcarrier {subcarrier} (already {existing})")]
    Collision {
        symbol: usize,
        subcarrier: usize,
        existing: String,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("division by zero-valued resource element at symbol {symbol}, subcarrier {subcarrier}")]
    ZeroDivision { symbol: usize, subcarrier: usize },

    #[error("vehicle at angle {angle_deg:.2} deg is outside the codebook coverage of +/-{coverage_deg:.2} deg")]
    Coverage { angle_deg: f64, coverage_deg: f64 },
}

impl IsacError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        IsacError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, IsacError>;
