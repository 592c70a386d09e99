use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A spec or constants field failed validation.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    /// A structured-text document did not parse.
    #[error("parse error at line {line}, column {column} (`{path}`): {message}")]
    Parse {
        line: usize,
        column: usize,
        path: String,
        message: String,
    },

    /// A material violates its invariants.
    #[error("material `{material}`{}: {message}", point.map(|p| format!(" point {p}")).unwrap_or_default())]
    Material {
        material: String,
        point: Option<usize>,
        message: String,
    },

    /// The design pipeline produced a result that violates a physical or
    /// geometric bound.
    #[error("infeasible design, violated bound `{bound}`: {message}")]
    Infeasible { bound: String, message: String },

    #[error("magnetic circuit solver failed in bracket [{lo:e}, {hi:e}] Wb: {message}")]
    Solver { lo: f64, hi: f64, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn infeasible(bound: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Infeasible {
            bound: bound.into(),
            message: message.into(),
        }
    }

    /// Dotted path of the offending field, when the error has one.
    pub fn field_path(&self) -> Option<&str> {
        match self {
            Error::Validation { field, .. } => Some(field),
            Error::Parse { path, .. } => Some(path),
            Error::Infeasible { bound, .. } => Some(bound),
            _ => None,
        }
    }

    /// True for errors caused by the inputs rather than by the engine
    /// failing to find a feasible design.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. } | Error::Parse { .. } | Error::Material { .. } | Error::Domain(_)
        )
    }
}

/// Deserialize a JSON document, reporting the failing field path together
/// with line and column.
pub fn from_json_slice<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            line: inner.line(),
            column: inner.column(),
            path,
            message: inner.to_string(),
        }
    })
}

/// Deserialize from an already-parsed JSON value. Line information is not
/// available on this route.
pub fn from_json_value<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::Parse {
            line: 0,
            column: 0,
            path,
            message: e.into_inner().to_string(),
        }
    })
}

pub(crate) fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

pub(crate) fn require_fraction(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in (0, 1), got {value}")))
    }
}
