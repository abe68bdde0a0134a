use thiserror::Error;

/// Numeric failure raised while evaluating a symbol or phase.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("not differentiable at a singular point of {0}")]
    NonDifferentiable(&'static str),
    #[error("non-finite result")]
    NonFinite,
    #[error("{0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FioError {
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("points per dimension must be a power of two >= 8, got {0}")]
    NotPowerOfTwo(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("class mismatch: {0}")]
    ClassMismatch(String),
    #[error("stationary point detected (min |grad| = {0:.3e})")]
    StationaryPoint(f64),
    #[error("quadrature underresolved: {detail}; need at least {required} points per dimension")]
    Underresolved { required: usize, detail: String },
    #[error(
        "amplitude does not decay fast enough (tail estimate {tail:.3e}); acknowledge truncation to proceed"
    )]
    UnacknowledgedTruncation { tail: f64 },
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("inconsistent Holder exponents: {0}")]
    InconsistentHolder(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("need at least 4 usable levels, got {0}")]
    TooFewLevels(usize),
    #[error("io: {0}")]
    Io(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        source: Box<FioError>,
    },
}

impl FioError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        FioError::InvalidArgument(msg.into())
    }

    /// Wraps the error with the name of the pipeline stage that raised it.
    pub fn at_stage(self, stage: &str) -> Self {
        FioError::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for FioError {
    fn from(e: std::io::Error) -> Self {
        FioError::Io(e.to_string())
    }
}
