//! Library half of the `gradstar` binary: built-in algebras and identity
//! sets, campaign configuration, and the command implementations that
//! produce the report documents. The binary in `main.rs` only parses flags,
//! resolves the configuration and maps outcomes to exit codes; everything
//! else lives here so integration tests can drive it in-process.

pub mod config;
pub mod run;
pub mod sets;

use std::fmt;

/// Errors surfaced to the user, both mapped to exit code 1. `Usage` covers
/// bad flags, unparsable configuration and impossible requests (say, a
/// symplectic involution on odd m); `Op` covers runtime failures such as an
/// exceeded evaluation budget or an unwritable output path. Mathematical
/// disagreements are never errors: they ride inside a report's
/// `discrepancies` array and drive exit code 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Op(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Op(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gradstar::eval::EvalError> for CliError {
    fn from(e: gradstar::eval::EvalError) -> Self {
        CliError::Op(e.to_string())
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Enumeration preconditions are the caller's fault, resource exhaustion is
/// an operational failure; everything else bubbles up as-is.
pub(crate) fn good_err(e: gradstar::goodmono::GoodError) -> CliError {
    use gradstar::goodmono::GoodError;
    match &e {
        GoodError::SizeTooSmall(_) | GoodError::NotMultilinear | GoodError::TaggedLetter(_) => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Op(e.to_string()),
    }
}
