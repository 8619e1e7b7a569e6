use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("truncated data chunk: expected {expected} bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },
    #[error("unsupported sample rate {found} Hz (expected {expected} Hz)")]
    SampleRate { expected: u32, found: u32 },

    #[error("empty dataset under {0}")]
    EmptyDataset(PathBuf),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("manifest references missing file {0}")]
    MissingFile(PathBuf),

    #[error("non-finite sample value {0}")]
    NonFinite(f64),
    #[error("binary16 pattern {0:#06x} has exponent 31 (inf/NaN)")]
    InfNan(u16),
    #[error("value {0} outside the signed 16-bit range")]
    OutOfRange(i64),
    #[error("encoding kind mismatch: {0}")]
    KindMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("signal too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("degenerate mel filterbank: {0}")]
    DegenerateFilterbank(String),

    #[error("{0} has zero power")]
    ZeroPower(&'static str),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("need at least two classes, found {0}")]
    SingleClass(usize),
    #[error("loss became NaN at epoch {0}")]
    NanLoss(usize),

    #[error("bad container: {0}")]
    Format(String),
    #[error("score file: {0}")]
    Scores(String),
    #[error("fusion: {0}")]
    Fusion(String),
    #[error("missing truth label for utterance {0}")]
    MissingTruth(String),
    #[error("unknown label {0}")]
    UnknownLabel(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
