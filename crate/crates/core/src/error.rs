use thiserror::Error;

/// Errors raised by the simulation and measurement routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input violated its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numerical routine could not reach its accuracy target.
    #[error("accuracy failure in {what}: achieved residual {residual:e}")]
    Accuracy { what: String, residual: f64 },

    /// A linear system could not be factored.
    #[error("singular system: {0}")]
    Singular(String),

    /// A study configuration could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Wraps the error with a location such as `mode 17` or `sample 3`.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures caused by the user's input rather than the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidParameter(_) | Error::Config(_)
        )
    }
}

pub(crate) trait ResultExt<T> {
    fn context_with<F: FnOnce() -> String>(self, f: F) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context_with<F: FnOnce() -> String>(self, f: F) -> Result<T> {
        self.map_err(|e| e.context(f()))
    }
}
