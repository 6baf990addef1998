use std::path::PathBuf;

use thiserror::Error;

/// Every failure the engine, analysis routines and CLI can report.
///
/// Each variant maps to one error category; the CLI exits with
/// [`Error::exit_code`] and prints the category tag in front of the message.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid value for `{key}`: {reason}")]
    Range { key: String, reason: String },

    #[error("{path}: syntax error at line {line}: {message}")]
    Syntax {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("assortativity is undefined: excess degree variance is zero")]
    UndefinedAssortativity,

    #[error("insufficient support for a power-law fit: {points} usable points, need at least 3")]
    InsufficientSupport { points: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("run m={m} replicate={replicate} seed={seed}: {source}")]
    Run {
        m: usize,
        replicate: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn range(key: &str, reason: impl Into<String>) -> Self {
        Error::Range {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// Short tag naming the error category.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) | Error::Range { .. } => "config",
            Error::Syntax { .. } => "syntax",
            Error::Degenerate(_) | Error::UndefinedAssortativity => "degenerate",
            Error::InsufficientSupport { .. } => "fit",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Run { source, .. } => source.category(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 2,
            "syntax" => 3,
            "io" => 4,
            "parse" => 5,
            "degenerate" => 6,
            "fit" => 7,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
