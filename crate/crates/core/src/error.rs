use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0} is undefined for zero total occupation")]
    UndefinedStatistic(&'static str),

    #[error("unsupported pulse shape: {0}")]
    UnsupportedShape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "anchor points imply power-law exponent {exponent:.3}, outside [0, {max}]; \
         they belong to different operating points, select a preset instead"
    )]
    InconsistentAnchors { exponent: f64, max: f64 },

    #[error("expected a {expected} click stream")]
    WrongMode { expected: &'static str },

    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    #[error("unphysical sideband asymmetry: gamma_b ({gamma_b}) <= gamma_r ({gamma_r})")]
    UnphysicalAsymmetry { gamma_r: f64, gamma_b: f64 },

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("under-constrained fit: {0}")]
    UnderConstrained(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed click stream: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects NaN/inf and values below `min` (inclusive bound).
pub(crate) fn check_at_least(name: &'static str, value: f64, min: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::invalid(name, format!("{value} is not finite")));
    }
    if value < min {
        return Err(Error::invalid(name, format!("{value} < {min}")));
    }
    Ok(value)
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::invalid(name, format!("{value} must be finite and > 0")));
    }
    Ok(value)
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::invalid(name, format!("{value} not in [0, 1]")));
    }
    Ok(value)
}
