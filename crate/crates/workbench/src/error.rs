use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Structured error body: `{code, message, field_path}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub field_path: Option<String>,
}

#[derive(Debug, Error)]
pub enum WorkbenchError {
    /// Bad inputs: spec, patch, constants or request body.
    #[error("{0}")]
    Invalid(emcad_core::Error),

    /// The engine could not produce a feasible design.
    #[error("{0}")]
    Infeasible(emcad_core::Error),

    #[error("{what} `{id}` not found")]
    NotFound { what: &'static str, id: String },

    /// The operation needs a succeeded record.
    #[error("record `{0}` failed; it has no result")]
    RecordFailed(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// A stored document could not be read back.
    #[error("corrupt project document `{path}`: {message}")]
    Corrupt { path: String, message: String },
}

pub type WbResult<T> = Result<T, WorkbenchError>;

impl WorkbenchError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        WorkbenchError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        WorkbenchError::Invalid(emcad_core::Error::Validation {
            field: field.into(),
            message: message.into(),
        })
    }

    pub fn code(&self) -> &'static str {
        match self {
            WorkbenchError::Invalid(e) => match e {
                emcad_core::Error::Parse { .. } => "parse_error",
                _ => "validation_error",
            },
            WorkbenchError::Infeasible(_) => "infeasible",
            WorkbenchError::NotFound { .. } => "not_found",
            WorkbenchError::RecordFailed(_) => "record_failed",
            WorkbenchError::Io { .. } => "io_error",
            WorkbenchError::Corrupt { .. } => "corrupt_document",
        }
    }

    pub fn field_path(&self) -> Option<String> {
        match self {
            WorkbenchError::Invalid(e) | WorkbenchError::Infeasible(e) => e.field_path().map(str::to_string),
            _ => None,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code().to_string(),
            message: self.to_string(),
            field_path: self.field_path(),
        }
    }
}

impl From<emcad_core::Error> for WorkbenchError {
    fn from(e: emcad_core::Error) -> Self {
        if e.is_validation() {
            WorkbenchError::Invalid(e)
        } else {
            WorkbenchError::Infeasible(e)
        }
    }
}
