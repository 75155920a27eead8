use thiserror::Error;

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidInput,
    CheckFailed,
    Io,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::InvalidInput, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::CheckFailed, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Io, message: message.into() }
    }

    pub fn context(self, what: &str) -> Self {
        Self { kind: self.kind, message: format!("{what}: {}", self.message) }
    }

    /// I/O failures share the invalid-input code.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::CheckFailed => EXIT_CHECK_FAILED,
            ErrorKind::InvalidInput | ErrorKind::Io => EXIT_INVALID_INPUT,
        }
    }
}

impl From<koszul_core::Error> for CliError {
    fn from(e: koszul_core::Error) -> Self {
        match e {
            koszul_core::Error::InvalidArgument(m) => Self::invalid(m),
            koszul_core::Error::PreconditionFailed(m) | koszul_core::Error::Numerical(m) => Self::failed(m),
        }
    }
}
