use std::fmt;

use serde::Serialize;

/// One violated scenario rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationIssue {
    pub field: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {what} = {value} ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),

    #[error(
        "decoy estimation failed: single-photon yield lower bound {y1_lower:e} is not positive"
    )]
    EstimationFailure { y1_lower: f64 },

    #[error("reconciliation refused: QBER estimate {qber} exceeds the limit {limit} of the available codes")]
    ReconciliationRefused { qber: f64, limit: f64 },

    #[error("key lengths differ: {alice} vs {bob}")]
    LengthMismatch { alice: usize, bob: usize },

    #[error("key pair of {len} bits is shorter than one reconciliation block ({block})")]
    KeyTooShort { len: usize, block: usize },

    #[error("malformed key file: {0}")]
    KeyFormat(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        expected,
    }
}
