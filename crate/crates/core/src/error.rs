use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value lies outside the domain an operation accepts.
    #[error("invalid input `{field}`: {reason}")]
    InputDomain { field: String, reason: String },

    /// A rectangle or cell index is empty or out of range.
    #[error("index error: {0}")]
    Index(String),

    /// Two grids that must agree in box or resolution do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An enumeration or kernel visited more basis sets than allowed.
    #[error("budget of {budget} set visits exceeded after {visited} visits")]
    BudgetExceeded { budget: u64, visited: u64 },

    /// A constant calculator was asked for an integral that does not converge.
    #[error("integral `{integral}` diverges: {condition}")]
    Divergence { integral: &'static str, condition: String },

    #[error("i/o error on `{path}`: {message}")]
    Io { path: String, message: String },

    #[error("parse error in `{source_name}`: {message}")]
    Parse { source_name: String, message: String },
}

impl Error {
    pub(crate) fn input(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InputDomain {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
