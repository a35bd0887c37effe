use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("ill-conditioned boundary system (condition estimate {estimate:.3e}); increase nodes_per_wavelength or shift k")]
    IllConditioned { estimate: f64 },

    #[error("non-uniform sample axis at index {index}")]
    NonUniformAxis { index: usize },

    #[error("solver failed at sample {index} (axis value {axis_value}): {source}")]
    Sample {
        index: usize,
        axis_value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } => true,
            Error::Sample { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
