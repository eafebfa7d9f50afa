use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point encoding does not match the space model: {0}")]
    MismatchedSpace(String),

    #[error("no canonical geodesic extension: {0}")]
    NoCanonicalExtension(String),

    #[error("parameter {t} outside geodesic domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("iteration budget exhausted before reaching tolerance ({0})")]
    BudgetExceeded(String),

    #[error("degenerate triangle: side through {0} has zero length")]
    DegenerateTriangle(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("operation not supported on this model: {0}")]
    UnsupportedModel(String),

    #[error("pole [{lo}, {hi}] does not fit strictly inside the geodesic domain")]
    PoleOutsideDomain { lo: f64, hi: f64 },

    #[error("curtains are not disjoint; separation level is undefined")]
    NotDisjoint,

    #[error("chain cannot be verified: {0}")]
    InsufficientWitnesses(String),

    #[error("chain too short: need at least {need}, got {got}")]
    ChainTooShort { need: usize, got: usize },

    #[error("geodesic too short to host the requested poles")]
    GeodesicTooShort,

    #[error("crossing parameters violate the frequency bound: {0}")]
    FrequencyViolated(String),

    #[error("argument {0} outside the admissible range {1}")]
    OutOfRange(f64, String),

    #[error("no displacement minimiser found within budget; isometry may not be semisimple")]
    NotSemisimpleDetected,

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("parse error at line {line}, column {column}: {msg}")]
    ParseError {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("invalid space descriptor: {0}")]
    ValidationError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
