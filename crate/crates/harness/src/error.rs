use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", parse_message(.path, .line, .field, .message))]
    Parse { path: Option<PathBuf>, line: Option<usize>, field: Option<String>, message: String },
    #[error("invalid config: {field}: {message}")]
    Config { field: &'static str, message: String },
    #[error("non-positive value {value} in column {column}")]
    NonPositiveValue { column: String, value: f64 },
    #[error("rate fit needs at least 2 rows, got {0}")]
    TooFewPoints(usize),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] hetlearn_core::Error),
}

fn parse_message(path: &Option<PathBuf>, line: &Option<usize>, field: &Option<String>, message: &str) -> String {
    let mut s = String::from("parse error");
    if let Some(p) = path {
        s.push_str(&format!(" in {}", p.display()));
    }
    if let Some(l) = line {
        s.push_str(&format!(" at line {l}"));
    }
    if let Some(f) = field {
        s.push_str(&format!(" (field `{f}`)"));
    }
    s.push_str(": ");
    s.push_str(message.trim());
    s
}

impl HarnessError {
    pub(crate) fn config(field: &'static str, message: impl Into<String>) -> Self {
        Self::Config { field, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// True for malformed or invalid configuration (as opposed to I/O or
    /// numerical failures).
    pub fn is_config_error(&self) -> bool {
        matches!(self, Self::Parse { .. } | Self::Config { .. })
    }

    /// True when the failure is a solver that ran out of iterations.
    pub fn is_no_convergence(&self) -> bool {
        matches!(self, Self::Core(hetlearn_core::Error::NoConvergence { .. }))
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
