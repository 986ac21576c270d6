use std::fmt;

/// Failures mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag, file or value: exit 2.
    Input(String),
    /// Enumeration budget exhausted: exit 3.
    Budget(String),
    /// A run finished but an internal self-check failed: exit 1.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Check(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Budget(m) | CliError::Check(m) => f.write_str(m),
        }
    }
}

impl From<maxrect::Error> for CliError {
    fn from(e: maxrect::Error) -> Self {
        match e {
            maxrect::Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Unwraps a flag that has no default, naming it when absent.
pub fn required<T>(v: Option<T>, field: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Input(format!("missing required value `--{field}`")))
}
