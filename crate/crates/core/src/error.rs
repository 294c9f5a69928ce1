use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("invalid stimulus spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("no dominant frequency: {0}")]
    NoDominantFrequency(String),

    #[error("singular regression: {0}")]
    SingularRegression(String),

    #[error("candidate set too large: {count} candidates exceeds the limit of {limit}")]
    ConfigTooLarge { count: u128, limit: u128 },

    #[error("extended least squares diverged at iteration {iteration}")]
    ElsDivergence { iteration: usize },

    #[error("insufficient history: {required} samples required, {available} available")]
    InsufficientHistory { required: usize, available: usize },

    #[error("free-run simulation diverged at step {step}")]
    Diverged { step: usize },

    #[error("unstable channel: output diverged at step {step}")]
    UnstableChannel { step: usize },

    #[error("no viable model: {0}")]
    NoViableModel(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Recording ingestion failures. Rows are 1-based data rows (the header is
/// not counted).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("missing header row")]
    MissingHeader,

    #[error("unexpected header {found:?}, expected \"t,input_v,output_v\"")]
    BadHeader { found: String },

    #[error("row {row}: expected {expected} columns, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: cannot parse {text:?} as a number")]
    InvalidNumber {
        row: usize,
        column: &'static str,
        text: String,
    },

    #[error("row {row}, column {column}: non-finite value")]
    NonFinite { row: usize, column: &'static str },

    #[error("row {row}: time is not strictly increasing")]
    NonIncreasingTime { row: usize },

    #[error("row {row}: time step deviates from the uniform sampling interval")]
    NonUniformTime { row: usize },

    #[error("inferred sample rate {inferred} Hz differs from the declared {declared} Hz by more than 0.1%")]
    RateMismatch { inferred: f64, declared: f64 },

    #[error("recording has {rows} rows; at least {required} are needed")]
    TooShort { rows: usize, required: usize },

    #[error("recording metadata missing: {0}")]
    MissingMetadata(String),

    #[error("malformed csv: {0}")]
    Csv(String),
}

/// Coarse failure category, used by the command-line front-end to pick an
/// exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidSpec(_)
            | Error::InvalidArgument(_)
            | Error::InvalidConfig(_)
            | Error::ConfigTooLarge { .. } => ErrorClass::Usage,
            Error::InvalidSeries(_)
            | Error::Degenerate(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorClass::Data,
            Error::UndefinedCorrelation(_)
            | Error::NoDominantFrequency(_)
            | Error::SingularRegression(_)
            | Error::ElsDivergence { .. }
            | Error::InsufficientHistory { .. }
            | Error::Diverged { .. }
            | Error::UnstableChannel { .. }
            | Error::NoViableModel(_) => ErrorClass::Numerical,
        }
    }
}
