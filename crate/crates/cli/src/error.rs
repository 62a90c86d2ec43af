use std::fmt;
use std::path::{Path, PathBuf};

/// Errors surfaced by the command-line front-end.
#[derive(Debug)]
pub enum CliError {
    /// A library error, with the file or period it happened in.
    Core {
        context: String,
        source: mfcca::Error,
    },
    Config(String),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn core(context: impl Into<String>, source: mfcca::Error) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 0 success, 2 config, 3 data, 4 no scaling, 5 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } => source.class().exit_code(),
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core { context, source } => write!(f, "{context}: {source}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a context string to library results.
pub trait Context<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for mfcca::Result<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::core(ctx(), e))
    }
}
