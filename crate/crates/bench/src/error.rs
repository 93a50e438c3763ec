//! Command failures and their exit codes.

use serde::Serialize;
use serde_json::{json, Value};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A batch finished but at least one object failed.
    pub const OBJECT_ERRORS: i32 = 1;
    /// Invalid arguments or config, unreadable input, misaligned ids.
    pub const INVALID: i32 = 2;
    /// Bradley-Terry scores diverge on the given records.
    pub const SEPARATED: i32 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Validation,
    Io,
    Parse,
    Compute,
    Locked,
    MisalignedIds,
    SeparatedGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub details: Value,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into(), details: Value::Null }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Validation, message)
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError { kind: ErrorKind::Io, message: format!("{}: {e}", path.display()), details: json!({ "path": path }) }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::SeparatedGraph => exit::SEPARATED,
            _ => exit::INVALID,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind, "message": self.message });
        if !self.details.is_null() {
            v["details"] = self.details.clone();
        }
        v
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Core errors that reach the CLI are either bad parameters or failed
/// computations on valid input.
pub fn compute_error(e: impl std::fmt::Display) -> CliError {
    CliError::new(ErrorKind::Compute, e.to_string())
}
