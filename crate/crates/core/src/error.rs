use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid window size {0}: must be odd and at least 3")]
    InvalidWindow(usize),

    #[error("pixel ({x}, {y}) lies outside the {width}x{height} image")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("image shapes differ: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("sweep cell (w={window}, k={k}): {source}")]
    SweepCell {
        window: usize,
        k: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}

/// PNM decoding failures. Every variant carries the byte offset where
/// decoding stopped.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("byte {offset}: unsupported magic number (expected P2, P3, P5 or P6)")]
    BadMagic { offset: usize },

    #[error("byte {offset}: malformed header: {reason}")]
    MalformedHeader { offset: usize, reason: String },

    #[error("byte {offset}: unsupported maxval {maxval} (only 255 is accepted)")]
    UnsupportedMaxval { offset: usize, maxval: u64 },

    #[error("byte {offset}: truncated payload, expected {expected} samples but found {found}")]
    TruncatedPayload {
        offset: usize,
        expected: usize,
        found: usize,
    },

    #[error("byte {offset}: malformed sample: {reason}")]
    BadSample { offset: usize, reason: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::BadMagic { offset }
            | ParseError::MalformedHeader { offset, .. }
            | ParseError::UnsupportedMaxval { offset, .. }
            | ParseError::TruncatedPayload { offset, .. }
            | ParseError::BadSample { offset, .. } => *offset,
        }
    }
}
