use thiserror::Error;

/// Errors raised by the link components and the simulation runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty frame")]
    EmptyFrame,
    #[error("misaligned codeword: length {0} is not a multiple of the code's output width")]
    MisalignedCodeword(usize),
    #[error("invalid code configuration: {0}")]
    InvalidCode(String),
    #[error("interleaver shape {rows}x{cols} does not match frame length {len}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    #[error("invalid interleaver shape: {0}")]
    InvalidShape(String),
    #[error("order {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{users} users requested but the codebook only has {order} rows")]
    TooManyUsers { users: usize, order: usize },
    #[error("empty spreading code")]
    EmptyCode,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unsupported Daubechies filter length {0} (expected 2, 4, 6 or 8)")]
    UnsupportedTaps(usize),
    #[error("channel singular: |h1|^2 + |h2|^2 = 0")]
    ChannelSingular,
    #[error("Eb/N0 must be positive, got {0}")]
    NonPositiveEbN0(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    /// `--help` or `--version` was requested; carries the rendered text.
    #[error("{0}")]
    Help(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
