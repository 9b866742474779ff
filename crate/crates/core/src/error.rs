use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt audio file: {0}")]
    CorruptFile(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid audio buffer: {0}")]
    InvalidBuffer(String),
    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    SampleRateMismatch { expected: u32, actual: u32 },

    #[error("intensity level {0} outside 1..=10")]
    InvalidLevel(i64),
    #[error("invalid effect settings: {0}")]
    InvalidSettings(String),
    #[error("EQ cutoffs {low} Hz / {high} Hz invalid at {sample_rate} Hz")]
    InvalidCutoff { low: f64, high: f64, sample_rate: u32 },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("unknown effect `{0}`")]
    UnknownEffect(String),

    #[error("input too short: {frames} frames, need at least {required}")]
    InputTooShort { frames: usize, required: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("duplicate record: track `{track}`, condition `{condition}`")]
    DuplicateRecord { track: String, condition: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing embedding for track `{track}`, condition `{condition}`")]
    MissingEmbedding { track: String, condition: String },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("manifest error at row {row}: {msg}")]
    Manifest { row: usize, msg: String },
    #[error("unsupported for this task: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 3 for I/O failures, 2 for everything the caller
    /// could fix by changing inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}
