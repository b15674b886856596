use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("x1 = {x1} lies outside the domain [-{half_width}, {half_width}]")]
    OutOfDomain { x1: f64, half_width: f64 },

    #[error("quadrature relative error {estimate:.3e} in stratum {stratum} exceeds tolerance {tolerance:.3e}")]
    QuadratureTolerance {
        stratum: usize,
        estimate: f64,
        tolerance: f64,
    },

    #[error("weight update left stratum {stratum} with non-positive weight {value}")]
    NonPositiveWeight { stratum: usize, value: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("every replica was censored at beta = {beta}")]
    AllCensored { beta: f64 },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
