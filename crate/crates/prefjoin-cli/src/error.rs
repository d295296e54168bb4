use std::fmt;

/// CLI failures carry their process exit code: 2 usage, 3 input, 4 overflow.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Overflow(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Overflow(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Input(msg) => write!(f, "input: {msg}"),
            CliError::Overflow(msg) => write!(f, "overflow: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<prefjoin::Error> for CliError {
    fn from(err: prefjoin::Error) -> Self {
        match err {
            prefjoin::Error::Overflow(_) => CliError::Overflow(err.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Input(err.to_string())
    }
}
