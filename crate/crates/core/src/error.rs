use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a formula (zero distance, non-positive noise, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is inconsistent; `field` names the offending entry.
    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    /// The prox-linear step has a zero Lipschitz constant but a nonzero gradient.
    #[error("degenerate auxiliaries: Lipschitz constant is zero while the gradient is not")]
    DegenerateAuxiliary,

    #[error("failed to parse config: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
