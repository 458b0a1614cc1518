//! Dataset loading, scoring, report generation and synthetic StepGame stories.

mod example;
mod load;
mod report;
mod score;
mod synth;

pub use example::Example;
pub use load::{load_sparqa, load_stepgame, EvalError, DEFAULT_SEED};
pub use report::{
    build_report, read_traces, write_report, write_traces, CellAccuracy, EvalReport, Flag,
    FlagReason, ReportRow, ScoredExample,
};
pub use score::{score, MatchKind, MatchResult};
pub use synth::{generate_story, SyntheticStory};
