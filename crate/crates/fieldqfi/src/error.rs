use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A spec or config field failed validation; `field` is a dotted path.
    #[error("{field}: {reason}")]
    Spec { field: String, reason: String },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
    #[error(transparent)]
    Core(#[from] fieldqfi_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn spec(field: impl Into<String>, reason: impl ToString) -> Self {
        Error::Spec { field: field.into(), reason: reason.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
