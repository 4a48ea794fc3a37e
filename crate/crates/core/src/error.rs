use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structure constants are not antisymmetric: deviation {0:e}")]
    NotAntisymmetric(f64),

    #[error("Jacobi identity violated: residual {residual:e} exceeds {tol:e}")]
    JacobiViolation { residual: f64, tol: f64 },

    #[error("inconsistent bracket entry for [e{i}, e{j}]: {detail}")]
    InconsistentBracket { i: usize, j: usize, detail: String },

    #[error("algebra is not unimodular: trace vector {0:?}")]
    NotUnimodular([f64; 3]),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("metric is degenerate (signature {positive},{negative},{zero})")]
    DegenerateMetric {
        positive: usize,
        negative: usize,
        zero: usize,
    },

    #[error("metric is ill-conditioned (condition number {0:e})")]
    IllConditionedMetric(f64),

    #[error("Killing form is degenerate")]
    DegenerateKilling,

    #[error("eigenvalue clustering is inconclusive: {0}")]
    AmbiguousSpectrum(String),

    #[error("spanning vectors are linearly dependent")]
    DependentSpan,

    #[error("invariant direction candidate stalled at residual {0:e}")]
    ResidualTooHigh(f64),

    #[error("degenerate planar input: {0}")]
    DegenerateInput(String),

    #[error("algebra is not of type E(1,1)")]
    NotE11,

    #[error("algebra is not of type sl(2,R)")]
    NotSl2,

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("bad integrator options: {0}")]
    BadOptions(String),

    #[error("not enough samples in the final decade of norm growth ({0})")]
    InsufficientTail(usize),

    #[error("trajectory did not end in a blow-up")]
    NoBlowUp,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
