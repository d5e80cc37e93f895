use std::fmt;

/// Runner errors with a stable exit-status contract: 1 for I/O failures,
/// 2 for usage problems, 3 for any diagnostic (invariant) failure.
#[derive(Debug)]
pub enum CliError {
    Core(srmap_core::Error),
    Io(std::io::Error),
    Render(String),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Core(srmap_core::Error::Io(_)) => 1,
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
            CliError::Render(msg) => write!(f, "render failed: {msg}"),
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<srmap_core::Error> for CliError {
    fn from(e: srmap_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Render(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
