use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    MalformedRow { line: usize, message: String },

    #[error("line {line}: non-positive close {close} for {symbol}")]
    NonPositiveClose { line: usize, symbol: String, close: f64 },

    #[error("line {line}: unknown symbol {symbol:?}")]
    UnknownSymbol { line: usize, symbol: String },

    #[error("duplicate observation ({symbol}, {date}) on lines {first_line} and {second_line}")]
    DuplicateObservation { symbol: String, date: NaiveDate, first_line: usize, second_line: usize },

    #[error("invalid metadata: {0}")]
    InvalidMetadata(String),

    #[error("empty calendar: no observation dates in panel")]
    EmptyCalendar,

    #[error("market {symbol} has no observations on any retained date")]
    NoObservations { symbol: String },

    #[error("panel is already phased")]
    AlreadyPhased,

    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("window of {window} rows does not fit a panel of {rows} rows")]
    WindowTooLong { window: usize, rows: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("date mismatch: {0}")]
    DateMismatch(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures map to CLI exit status 2; everything else is an
    /// input error (exit status 1).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::ZeroVariance(_) => true,
            Error::Context { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context { context: context.into(), source: Box::new(self) }
    }
}
