use std::fmt;

use thiserror::Error;

use super::ast::Span;

/// Syntax error with the position of the offending token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

impl ParseError {
    pub fn new(message: impl Into<String>, span: Span) -> Self {
        ParseError {
            message: message.into(),
            span,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PARSE: {} @ {}", self.message, self.span)
    }
}

impl std::error::Error for ParseError {}

/// Every way a program can fail to produce a stable model.
///
/// Display strings follow `CLASS: detail @ line:col`; they are quoted verbatim
/// in refinement prompts, so keep them stable.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AspError {
    #[error("{0}")]
    Parse(ParseError),
    #[error("UNSAFE: unsafe variable '{variable}' in rule '{rule}' @ {span}")]
    UnsafeVariable {
        variable: String,
        rule: String,
        span: Span,
    },
    #[error("GROUND: {message} @ {span}")]
    Ground { message: String, span: Span },
    #[error("UNSTRATIFIABLE: {cycle} @ {span}")]
    Unstratifiable { cycle: String, span: Span },
    #[error("UNSAT: integrity constraint '{constraint}' is violated @ {span}")]
    Unsatisfiable { constraint: String, span: Span },
}

impl From<ParseError> for AspError {
    fn from(e: ParseError) -> Self {
        AspError::Parse(e)
    }
}

/// Coarse failure family, used when mapping outcomes to pipeline error classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureKind {
    Parse,
    UnsafeVariable,
    Ground,
    Unstratifiable,
    Unsatisfiable,
}

impl AspError {
    pub fn kind(&self) -> FailureKind {
        match self {
            AspError::Parse(_) => FailureKind::Parse,
            AspError::UnsafeVariable { .. } => FailureKind::UnsafeVariable,
            AspError::Ground { .. } => FailureKind::Ground,
            AspError::Unstratifiable { .. } => FailureKind::Unstratifiable,
            AspError::Unsatisfiable { .. } => FailureKind::Unsatisfiable,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            AspError::Parse(p) => p.span,
            AspError::UnsafeVariable { span, .. }
            | AspError::Ground { span, .. }
            | AspError::Unstratifiable { span, .. }
            | AspError::Unsatisfiable { span, .. } => *span,
        }
    }
}
