use std::fmt;
use std::path::Path;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid flags, config values or missing input paths.
    Config,
    /// Malformed or inconsistent input data.
    Data,
    /// A broken internal invariant.
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 1,
            ErrorKind::Data => 2,
            ErrorKind::Internal => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::Internal => "internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub path: Option<String>,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Config, message: message.into(), path: None }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Data, message: message.into(), path: None }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Internal, message: message.into(), path: None }
    }

    pub fn at(mut self, path: &Path) -> Self {
        self.path = Some(path.display().to_string());
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// Single-line JSON record for the error stream.
    pub fn to_json_line(&self) -> String {
        let mut record = serde_json::json!({
            "error": self.kind.name(),
            "exit_code": self.exit_code(),
            "message": self.message,
        });
        if let Some(path) = &self.path {
            record["path"] = serde_json::Value::String(path.clone());
        }
        record.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{} error at {p}: {}", self.kind.name(), self.message),
            None => write!(f, "{} error: {}", self.kind.name(), self.message),
        }
    }
}

impl std::error::Error for CliError {}

/// Opening or reading a named input: a missing path is a config error
/// naming it, anything else a data error.
pub fn io_error(path: &Path, err: std::io::Error) -> CliError {
    let kind = if err.kind() == std::io::ErrorKind::NotFound { ErrorKind::Config } else { ErrorKind::Data };
    CliError { kind, message: format!("{}: {err}", path.display()), path: Some(path.display().to_string()) }
}

/// Writing an output.
pub fn write_error(path: &Path, err: std::io::Error) -> CliError {
    CliError::data(format!("cannot write {}: {err}", path.display())).at(path)
}

pub type Result<T> = std::result::Result<T, CliError>;
