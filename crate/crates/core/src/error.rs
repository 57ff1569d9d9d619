use thiserror::Error;

/// Errors raised by the solver library.
///
/// Every variant maps onto a stable string code (see [`Error::code`]) which the
/// CLI writes into machine-readable error reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square or has an inconsistent shape: {0}")]
    Shape(String),
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not symmetric: a[{row}][{col}] != a[{col}][{row}]")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix entry a[{row}][{col}] = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    /// Index sets are 1-based, matching the usual mathematical notation.
    #[error("matrix is reducible: {part1:?} and {part2:?} are uncoupled")]
    Reducible { part1: Vec<usize>, part2: Vec<usize> },
    #[error("matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("singularity exponent beta[{index}] = {value} must exceed -2")]
    BetaOutOfRange { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("index {index} out of range for system size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("subset enumeration limited to n <= 16 (got n = {0})")]
    DimensionTooLarge(usize),
    #[error("no nonnegative root for the last energy component")]
    NoNonnegativeRoot,
    #[error("rejection sampling exhausted after {0} draws")]
    SamplingExhausted(usize),
    #[error("invalid tolerance or window: {0}")]
    InvalidTolerance(String),
    #[error("Picard start radius too large (contraction ratio {ratio:e}, error bound {bound:e})")]
    R0TooLarge { ratio: f64, bound: f64 },
    #[error("integration did not reach the decay regime by t = {t_end}")]
    NotConverged { t_end: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("tail estimate {tail:e} dominates the energy tolerance")]
    TailDominates { tail: f64 },
    #[error("base profile is not converged")]
    BaseNotConverged,
    #[error("mode must be at least 1 (got {0})")]
    InvalidMode(u32),
    #[error("comparison function requires all beta < 0 (beta[{index}] = {value})")]
    BetaNotNegative { index: usize, value: f64 },
    #[error("target energy is not in the admissible hypersurface: {0}")]
    TargetNotInPi2(String),
    #[error("integration failed during Newton iteration at c = {c:?}")]
    IntegrationFailed { c: Vec<f64> },
    #[error("Newton iteration cap reached after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("validation error: {0}")]
    Validation(Box<Error>),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Flat machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Shape(_) => "Shape",
            Error::NonFinite { .. } => "NonFinite",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::Reducible { .. } => "Reducible",
            Error::Singular { .. } => "Singular",
            Error::BetaOutOfRange { .. } => "BetaOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EmptySubset => "EmptySubset",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DimensionTooLarge(_) => "DimensionTooLarge",
            Error::NoNonnegativeRoot => "NoNonnegativeRoot",
            Error::SamplingExhausted(_) => "SamplingExhausted",
            Error::InvalidTolerance(_) => "InvalidTolerance",
            Error::R0TooLarge { .. } => "R0TooLarge",
            Error::NotConverged { .. } => "NotConverged",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::TailDominates { .. } => "TailDominates",
            Error::BaseNotConverged => "BaseNotConverged",
            Error::InvalidMode(_) => "InvalidMode",
            Error::BetaNotNegative { .. } => "BetaNotNegative",
            Error::TargetNotInPi2(_) => "TargetNotInPi2",
            Error::IntegrationFailed { .. } => "IntegrationFailed",
            Error::MaxIterations { .. } => "MaxIterations",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Schema { .. } => "SchemaError",
            Error::Validation(_) => "ValidationError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
