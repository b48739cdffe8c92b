//! Non-fatal diagnostics produced alongside analysis results.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagCode {
    /// A `dangerous` call signature that appears in no loaded mapping level.
    UnknownApi,
    /// A calling-context path hit the configured length bound and was truncated.
    PathBoundExceeded,
    /// The dataflow solver hit its iteration cap (should not happen on valid input).
    NonTermination,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::UnknownApi => "unknown-api",
            DiagCode::PathBoundExceeded => "path-bound-exceeded",
            DiagCode::NonTermination => "non-termination",
        }
    }
}

/// A warning attached to an analysis run. Diagnostics never abort the run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagCode, message: impl Into<String>) -> Self {
        Diagnostic { code, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning[{}]: {}", self.code.as_str(), self.message)
    }
}
