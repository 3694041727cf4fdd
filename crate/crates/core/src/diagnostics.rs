// SPDX-License-Identifier: Apache-2.0

use crate::text::SourceLocation;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub loc: SourceLocation,
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>, loc: SourceLocation) -> Self {
        Self {
            loc,
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn warning(code: &str, message: impl Into<String>, loc: SourceLocation) -> Self {
        Self {
            loc,
            severity: Severity::Warning,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{sev}[{}] {}:{}..{}: {}",
            self.code, self.loc.file, self.loc.start, self.loc.end, self.message
        )
    }
}

/// Diagnostic codes. Parse codes start with `E0`, typing codes with `E1`.
pub mod codes {
    pub const UNEXPECTED_CHAR: &str = "E001";
    pub const UNEXPECTED_TOKEN: &str = "E002";
    pub const MISSING_MODULE: &str = "E003";
    pub const UNCLOSED: &str = "E004";
    pub const BAD_LITERAL: &str = "E005";
    pub const TRAILING_INPUT: &str = "E006";

    pub const UNBOUND_NAME: &str = "E101";
    pub const UNBOUND_MODULE: &str = "E102";
    pub const UNBOUND_TYPE: &str = "E103";
    pub const UNBOUND_FUNCTION: &str = "E104";
    pub const TYPE_MISMATCH: &str = "E105";
    pub const ARITY: &str = "E106";
    pub const DUPLICATE: &str = "E107";
    pub const VISIBILITY: &str = "E108";
    pub const NO_FIELD: &str = "E109";
    pub const FIELD_ACCESS: &str = "E110";
    pub const INLINE_RECURSION: &str = "E111";
    pub const INLINE_DEPTH: &str = "E112";
    pub const INTERNAL: &str = "E199";
}
