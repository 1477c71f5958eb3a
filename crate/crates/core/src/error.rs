use thiserror::Error;

/// A configuration value failed validation or could not be parsed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown observation variable `{name}`; valid names: {valid}")]
    UnknownVariable { name: String, valid: String },
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("cannot read `{path}`: {reason}")]
    Io { path: String, reason: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// The offending field, when the error names one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            ConfigError::UnknownVariable { name, .. } => Some(name),
            _ => None,
        }
    }
}
