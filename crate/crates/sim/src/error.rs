use std::fmt;

/// Failure of a scenario run, split by process exit code.
#[derive(Debug)]
pub enum SimError {
    /// Bad input: syntax, schema, physics domain, resolution or scan range.
    Validation(String),
    /// A numerical check failed or a result did not converge.
    Numerical(String),
    /// File-system failure, with the path involved.
    Io(String),
}

impl SimError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Validation(_) | SimError::Io(_) => 1,
            SimError::Numerical(_) => 2,
        }
    }

    /// Attaches the scenario section a core error came from.
    pub fn in_section(section: &str, err: nlint_core::Error) -> Self {
        use nlint_core::Error as E;
        match err {
            E::Domain { field, reason } => SimError::Validation(format!("{section}.{field}: {reason}")),
            other => SimError::from(other).prefixed(section),
        }
    }

    pub fn prefixed(self, context: &str) -> Self {
        match self {
            SimError::Validation(m) => SimError::Validation(format!("{context}: {m}")),
            SimError::Numerical(m) => SimError::Numerical(format!("{context}: {m}")),
            SimError::Io(m) => SimError::Io(format!("{context}: {m}")),
        }
    }
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Validation(m) => write!(f, "validation error: {m}"),
            SimError::Numerical(m) => write!(f, "numerical error: {m}"),
            SimError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for SimError {}

impl From<nlint_core::Error> for SimError {
    fn from(err: nlint_core::Error) -> Self {
        match err {
            nlint_core::Error::Numerical(msg) => SimError::Numerical(msg),
            other => SimError::Validation(other.to_string()),
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path, err: std::io::Error) -> SimError {
    SimError::Io(format!("{}: {err}", path.display()))
}
