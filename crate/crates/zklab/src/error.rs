use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid resolution {0}: every axis needs an even count >= 8")]
    InvalidResolution(usize),
    #[error("dimension mismatch: dim={dim}, lengths={lengths}, resolution={resolution}")]
    DimensionMismatch {
        dim: usize,
        lengths: usize,
        resolution: usize,
    },
    #[error("invalid box length {0}")]
    InvalidLength(f64),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("padded size {required} exceeds the memory cap of {cap} points")]
    ResolutionOverflow { required: usize, cap: usize },
    #[error("quadrature needs {required} nodes, budget is {budget}")]
    QuadratureBudgetExceeded { required: usize, budget: usize },
    #[error("infeasible on grid: {0}")]
    InfeasibleOnGrid(String),
    #[error("exponent constraint violated: {0}")]
    ExponentConstraintViolated(String),
    #[error("unsupported threshold kind `{0}`")]
    UnsupportedKind(String),
    #[error("empty block")]
    EmptyBlock,
    #[error("stability violation: {0}")]
    StabilityViolation(String),
    #[error("dealiasing overflow: {0}")]
    DealiasingOverflow(String),
    #[error("time grid mismatch: {0}")]
    TimeGridMismatch(String),
    #[error("no contraction after {iterations} iterations (last diff {last_diff:e})")]
    NoContraction { iterations: usize, last_diff: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
