use std::fmt;

use serde_json::json;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Output was written but at least one row failed.
    pub const ROW_ERRORS: i32 = 1;
    /// Invalid arguments or configuration.
    pub const USAGE: i32 = 2;
    /// Reading or writing a file failed.
    pub const IO: i32 = 3;
    /// A golden comparison found differences.
    pub const COMPARE_FAILED: i32 = 4;
}

#[derive(Debug)]
pub enum CliError {
    /// Configuration problem at a field path (empty for the whole document).
    Config {
        path: String,
        message: String,
    },
    Usage(String),
    Lib(ldtail::Error),
}

impl CliError {
    pub fn config(path: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.to_string(),
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "INVALID_CONFIG",
            CliError::Usage(_) => "USAGE",
            CliError::Lib(e) => e.code(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(ldtail::Error::Io { .. }) => exit::IO,
            _ => exit::USAGE,
        }
    }

    /// One-line JSON diagnostic.
    pub fn to_json(&self) -> String {
        let mut obj = json!({
            "level": "error",
            "code": self.code(),
            "message": self.to_string(),
        });
        if let CliError::Config { path, .. } = self {
            obj["path"] = json!(path);
        }
        obj.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { path, message } if path.is_empty() => write!(f, "invalid config: {message}"),
            CliError::Config { path, message } => write!(f, "invalid config at `{path}`: {message}"),
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ldtail::Error> for CliError {
    fn from(e: ldtail::Error) -> Self {
        CliError::Lib(e)
    }
}
