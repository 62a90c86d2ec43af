use thiserror::Error;

/// Errors raised by the analysis library.
///
/// Variants are grouped by the CLI exit-code class they map onto; see
/// [`Error::class`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gap error: irregular spacing at indices {indices:?} (expected step {expected}s)")]
    Gap { indices: Vec<usize>, expected: i64 },

    #[error("size error: {0}")]
    Size(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scale grid error: {0}")]
    ScaleGrid(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("no scaling window with R^2 >= {threshold} (best: {best})")]
    NoScaling { threshold: f64, best: String },

    #[error("degenerate spectrum: {0}")]
    SpectrumDegenerate(String),

    #[error("io error: {0}")]
    Io(String),
}

/// Coarse error classes, one per process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    NoScaling,
    Numeric,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::NoScaling => 4,
            ErrorClass::Numeric => 5,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::ScaleGrid(_) => ErrorClass::Config,
            Error::NoScaling { .. } => ErrorClass::NoScaling,
            Error::Numeric(_) | Error::SpectrumDegenerate(_) => ErrorClass::Numeric,
            Error::Parse { .. }
            | Error::Domain(_)
            | Error::Gap { .. }
            | Error::Size(_)
            | Error::Range(_)
            | Error::DegenerateSeries(_)
            | Error::Io(_) => ErrorClass::Data,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
