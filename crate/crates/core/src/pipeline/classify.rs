use std::fmt;

use serde::{Deserialize, Serialize};

use crate::asp::{AnswerTuple, FailureKind, SolverOutcome};

/// Outcome class of one evaluated program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Parse,
    Ground,
    Unstratifiable,
    Unsat,
    NoResult,
    Gateway,
    None,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 7] = [
        ErrorClass::Parse,
        ErrorClass::Ground,
        ErrorClass::Unstratifiable,
        ErrorClass::Unsat,
        ErrorClass::NoResult,
        ErrorClass::Gateway,
        ErrorClass::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Parse => "parse",
            ErrorClass::Ground => "ground",
            ErrorClass::Unstratifiable => "unstratifiable",
            ErrorClass::Unsat => "unsat",
            ErrorClass::NoResult => "no_result",
            ErrorClass::Gateway => "gateway",
            ErrorClass::None => "none",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a solver outcome and its extracted answers to an [`ErrorClass`].
///
/// Unsafe-variable failures fall under `ground`, since gringo reports them
/// while instantiating.
pub fn classify_outcome(outcome: &SolverOutcome, answers: &[AnswerTuple]) -> ErrorClass {
    match outcome {
        SolverOutcome::Failed(e) => match e.kind() {
            FailureKind::Parse => ErrorClass::Parse,
            FailureKind::UnsafeVariable | FailureKind::Ground => ErrorClass::Ground,
            FailureKind::Unstratifiable => ErrorClass::Unstratifiable,
            FailureKind::Unsatisfiable => ErrorClass::Unsat,
        },
        SolverOutcome::Model(_) if answers.is_empty() => ErrorClass::NoResult,
        SolverOutcome::Model(_) => ErrorClass::None,
    }
}
