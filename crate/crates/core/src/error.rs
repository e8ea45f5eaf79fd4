use thiserror::Error;

pub type Result<T> = std::result::Result<T, TofError>;

#[derive(Debug, Error)]
pub enum TofError {
    #[error("quadrature or series did not converge: {what} (estimate {estimate:e}, error {error:e})")]
    NonConvergence { what: String, estimate: f64, error: f64 },

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("operation not supported for wave-packet family {0}")]
    UnsupportedFamily(String),

    #[error("wave function node at {x:?}, t = {t}: rho = {rho:e}")]
    NodeEncountered { x: [f64; 3], t: f64, rho: f64 },

    #[error("wave function is not continuous at the arrival point z = {0}")]
    SingularityNotRegularized(f64),

    #[error("curve does not cover the negative-time tail: extrapolated tail mass {0:e}")]
    InsufficientTailCoverage(f64),

    #[error("packet is not right-moving: left-moving norm {0:e}")]
    NotRightMoving(f64),

    #[error("tau grids differ between the compared curves")]
    GridMismatch,

    #[error("far-field approximation used outside its regime: {0}")]
    RegimeViolation(String),

    #[error("wave packet is not normalized: norm {0}")]
    NotNormalized(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl TofError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        TofError::InvalidInput(msg.into())
    }
}
