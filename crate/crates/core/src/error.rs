use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: input/validation problems (bad
/// parameters, unsupported shape/measure combinations) and numerical
/// failures (divergence, quadrature that does not converge). The CLI maps
/// them to different exit codes via [`Error::is_validation`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("set has infinite Lebesgue measure")]
    InfiniteMeasure,

    #[error("measure is not admissible: {0}")]
    NotAdmissible(String),

    #[error("divergent integral {near_or_far}: {detail}")]
    Divergent { near_or_far: &'static str, detail: String },

    #[error("quadrature did not converge (estimated residual {residual:.3e}): {context}")]
    QuadratureFailed { residual: f64, context: String },

    #[error("grid of {requested} cells exceeds the memory bound {limit}; try spacing h >= {suggested_h:.4e}")]
    MemoryBound { requested: usize, limit: usize, suggested_h: f64 },

    #[error("limit hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("configuration error in [{section}]: {message}")]
    Config { section: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn config(section: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { section: section.into(), message: message.into() }
    }

    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Unsupported(_)
                | Error::DimensionMismatch { .. }
                | Error::InfiniteMeasure
                | Error::NotAdmissible(_)
                | Error::Config { .. }
                | Error::Io(_)
                | Error::MemoryBound { .. }
        )
    }

    /// Short machine-readable tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Unsupported(_) => "unsupported",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InfiniteMeasure => "infinite_measure",
            Error::NotAdmissible(_) => "not_admissible",
            Error::Divergent { .. } => "divergent",
            Error::QuadratureFailed { .. } => "quadrature_failed",
            Error::MemoryBound { .. } => "memory_bound",
            Error::HypothesisViolated(_) => "hypothesis_violated",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
