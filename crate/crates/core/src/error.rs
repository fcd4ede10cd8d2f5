use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
///
/// Each variant maps to a stable upper-case code (see [`Error::code`]) used by
/// the CLI for machine-readable diagnostics and for flagged report rows.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("h = {h} lies outside the convergence strip {strip}")]
    OutOfStrip { h: f64, strip: String },

    #[error("target mean {target} is outside the attainable drift limits {limits}")]
    TargetOutOfRange { target: f64, limits: String },

    #[error("saddle solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: u32, residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("x = {x} must exceed 1")]
    XTooSmall { x: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("convolution support of {points} points exceeds the limit of {limit}")]
    TooLarge { points: u64, limit: u64 },

    #[error("manifest has no result rows")]
    EmptyResult,

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "INVALID_SPEC",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::OutOfStrip { .. } => "OUT_OF_STRIP",
            Error::TargetOutOfRange { .. } => "TARGET_OUT_OF_RANGE",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::Degenerate(_) => "DEGENERATE",
            Error::XTooSmall { .. } => "X_TOO_SMALL",
            Error::Unsupported(_) => "UNSUPPORTED",
            Error::TooLarge { .. } => "TOO_LARGE",
            Error::EmptyResult => "EMPTY_RESULT",
            Error::SchemaMismatch(_) => "SCHEMA_MISMATCH",
            Error::Parse(_) => "PARSE_ERROR",
            Error::Io { .. } => "IO_ERROR",
        }
    }
}
