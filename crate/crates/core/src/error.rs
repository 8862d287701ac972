use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a domain invariant. `field` names the
    /// offending field using a dotted path where one is available.
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("{what} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("bitmask has {set_bits} set bits but only {values} values are stored")]
    ValueDeficit { set_bits: usize, values: usize },

    #[error("malformed sparse tensor: {0}")]
    Codec(String),

    #[error("value {value} is not representable in {format}")]
    NotRepresentable { value: f32, format: String },

    #[error("{0} is zero")]
    Zero(&'static str),

    #[error("no macro plan provisioned for {0}")]
    Unprovisioned(&'static str),

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
