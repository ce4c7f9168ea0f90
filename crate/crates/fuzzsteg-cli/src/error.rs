//! CLI error type with stable exit codes: 2 usage, 3 I/O, 4 capacity,
//! 5 integrity, 6 configuration, 1 anything else.

use fuzzsteg::inference::InferenceError;
use fuzzsteg::metrics::MetricsError;
use fuzzsteg::similarity::SimilarityError;
use fuzzsteg::stego::StegoError;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Capacity(String),
    Integrity(String),
    Config(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Capacity(_) => 4,
            CliError::Integrity(_) => 5,
            CliError::Config(_) => 6,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Io(m) => ("io", m),
            CliError::Capacity(m) => ("capacity", m),
            CliError::Integrity(m) => ("integrity", m),
            CliError::Config(m) => ("config", m),
            CliError::Other(m) => ("error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn io_err(context: &str, err: impl fmt::Display) -> CliError {
    CliError::Io(format!("{context}: {err}"))
}

impl From<StegoError> for CliError {
    fn from(err: StegoError) -> Self {
        match err {
            StegoError::MessageTooLong { .. } | StegoError::MessageBufferTooShort { .. } => {
                CliError::Capacity(err.to_string())
            }
            StegoError::BadMagic
            | StegoError::UnsupportedVersion(_)
            | StegoError::ChecksumMismatch { .. }
            | StegoError::Truncated { .. }
            | StegoError::TrailingData { .. }
            | StegoError::ShapeMismatch { .. }
            | StegoError::BadMethodId(_)
            | StegoError::KeyOverCapacity { .. } => CliError::Integrity(err.to_string()),
            StegoError::BadBitDepth(_) | StegoError::BadThreshold(_) => {
                CliError::Usage(err.to_string())
            }
        }
    }
}

impl From<SimilarityError> for CliError {
    fn from(err: SimilarityError) -> Self {
        match err {
            SimilarityError::ImageTooSmall(..) => CliError::Usage(err.to_string()),
            SimilarityError::Inference(e) => e.into(),
        }
    }
}

impl From<InferenceError> for CliError {
    fn from(err: InferenceError) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(err: MetricsError) -> Self {
        match err {
            MetricsError::ShapeMismatch(..) => CliError::Integrity(err.to_string()),
            MetricsError::UndefinedUqi(_) => CliError::Other(err.to_string()),
        }
    }
}

impl From<fuzzsteg::config::ConfigError> for CliError {
    fn from(err: fuzzsteg::config::ConfigError) -> Self {
        CliError::Config(err.to_string())
    }
}
