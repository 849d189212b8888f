use thiserror::Error;

/// Errors produced by the disparity pipeline and its I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("angular index ({u}, {v}) out of bounds for a {nu}x{nv} view grid")]
    AngularOutOfBounds { u: usize, v: usize, nu: usize, nv: usize },

    #[error("spatial index ({x}, {y}) out of bounds for a {width}x{height} view")]
    SpatialOutOfBounds { x: usize, y: usize, width: usize, height: usize },

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch { context: &'static str, expected: String, got: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("empty evaluation region")]
    EmptyEvaluation,

    #[error("evaluation region too small: need at least {needed} pixels, got {got}")]
    TooFewPixels { needed: usize, got: usize },

    #[error("{path}: format error at byte {offset}: {message}")]
    Format { path: String, offset: usize, message: String },

    #[error("missing view file {path} (view index {index})")]
    MissingView { path: String, index: usize },

    #[error("i/o error on {path}: {source}")]
    Io { path: String, #[source] source: std::io::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
