//! Engine for the stratified ASP fragment: parsing, safety checking,
//! grounding, solving and answer extraction.

mod answers;
mod ast;
mod error;
mod ground;
mod parser;
mod safety;
mod solve;

pub use answers::{extract_answers, format_tuple, AnswerTuple};
pub use ast::{
    ArithOp, Atom, BodyElement, CompareOp, Comparison, Literal, Program, Rule, Span, Term,
};
pub use error::{AspError, FailureKind, ParseError};
pub use ground::{
    ground, AtomPattern, GroundAtom, GroundElement, GroundLiteral, GroundOptions, GroundProgram,
    GroundRule, PredKey, RuleSource, Value, DEFAULT_DOMAIN_BOUND, DEFAULT_GROUND_CEILING,
};
pub use parser::parse_program;
pub use safety::{check_rule, check_safety};
pub use solve::{solve, stratify, SolverOutcome, StableModel};

/// Runs safety checking, grounding and solving on a parsed program.
pub fn run_program(program: &Program, opts: &GroundOptions) -> SolverOutcome {
    if let Err(e) = check_safety(program) {
        return SolverOutcome::Failed(e);
    }
    match ground(program, opts) {
        Ok(g) => solve(&g),
        Err(e) => SolverOutcome::Failed(e),
    }
}

/// Parses and runs program text end to end.
pub fn run_text(text: &str, opts: &GroundOptions) -> SolverOutcome {
    match parse_program(text) {
        Ok(p) => run_program(&p, opts),
        Err(e) => SolverOutcome::Failed(e.into()),
    }
}
