use thiserror::Error;

pub type Result<T> = std::result::Result<T, QuantError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment of order {r} is infinite for this distribution")]
    MomentUnavailable { r: f64 },

    #[error("distribution has bounded support; tail indices are undefined")]
    BoundedSupport,

    #[error("{op} did not converge (residual {residual:e})")]
    NonConvergence { op: &'static str, residual: f64 },

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("Pareto grid reading disagrees with stationarity oracle at n={level} (max deviation {deviation:e})")]
    OrientationMismatch { level: usize, deviation: f64 },

    #[error("points are not strictly increasing")]
    NotSorted,

    #[error("Voronoi cell {index} carries no probability mass")]
    EmptyCell { index: usize },

    #[error("stationary solve stopped after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("initialization strategy not supported here: {0}")]
    UnsupportedStrategy(String),

    #[error("codebook is empty")]
    EmptyCodebook,

    #[error("grids belong to different distributions or orders")]
    MixedSpecs,

    #[error("need at least {need} entries in the regression window, have {have}")]
    InsufficientData { have: usize, need: usize },

    #[error("no closed form for this family: {0}")]
    UnsupportedFamily(String),

    #[error("nu = {nu} must lie in (0, {nu_star})")]
    NuOutOfRange { nu: f64, nu_star: f64 },

    #[error("block size n^((r+nu)/d) overflows")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),
}

impl QuantError {
    /// True for failures of an iterative numerical method rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QuantError::NonConvergence { .. }
                | QuantError::OrientationMismatch { .. }
                | QuantError::MaxIterations { .. }
                | QuantError::EmptyCell { .. }
        )
    }
}
