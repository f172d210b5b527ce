use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("base index {index} outside the pre-generated window [-{window}, {window}]")]
    WindowOverflow { index: i64, window: i64 },

    #[error("base point {point} does not belong to a {system} base")]
    IncompatibleBasePoint { point: String, system: &'static str },

    #[error("cannot project the zero vector")]
    ZeroVector,

    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("field is classified {0:?}, torus boundary requires a Torus field")]
    NotTorus(crate::attractor::Regime),

    #[error("initial vector lies within {distance:.3e} of the stable direction")]
    IllConditioned { distance: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { name, reason: reason.into() }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }
}
