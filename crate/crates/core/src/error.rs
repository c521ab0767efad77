use thiserror::Error;

/// Errors produced by the ODDM library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("waveform does not cover the matched-filter support: need samples [{need_start}, {need_end}), have [{have_start}, {have_end})")]
    InsufficientSpan {
        need_start: i64,
        need_end: i64,
        have_start: i64,
        have_end: i64,
    },

    #[error("path delay {delay} exceeds the cyclic prefix length {cp_len}")]
    PathExceedsCp { delay: usize, cp_len: usize },

    #[error("path is off the delay-Doppler grid: {0}")]
    OffGrid(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
