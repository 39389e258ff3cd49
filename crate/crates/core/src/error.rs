use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("Sakoe-Chiba band of half-width {band} cannot connect a {rows}x{cols} table")]
    BandInfeasible { band: usize, rows: usize, cols: usize },

    #[error("label schema violation: {0}")]
    SchemaViolation(String),

    #[error("cannot decode channel {channel} ({name}): {reason}")]
    Decode {
        channel: usize,
        name: String,
        reason: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("failed writing {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("malformed data: {0}")]
    Format(String),

    #[error("series of length {len} is shorter than the window length {window_len}")]
    EmptyIngest { len: usize, window_len: usize },

    #[error("stream closed by the sink")]
    StreamClosed,
}

impl Error {
    /// Process exit code for the command-line front end: 1 config, 2 I/O, 3 data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidWindow(_) | Error::BandInfeasible { .. } => 1,
            Error::Write { .. } | Error::Io(_) | Error::StreamClosed => 2,
            Error::InvalidSeries(_)
            | Error::ShapeMismatch { .. }
            | Error::SchemaViolation(_)
            | Error::Decode { .. }
            | Error::Parse { .. }
            | Error::Format(_)
            | Error::EmptyIngest { .. } => 3,
        }
    }
}
