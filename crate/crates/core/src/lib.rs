//! Neural-symbolic spatial reasoning: a stratified ASP engine, spatial
//! knowledge programs, an LLM gateway, the three answering strategies and
//! an evaluation harness for StepGame- and SparQA-style question answering.

pub mod asp;
pub mod eval;
pub mod llm;
pub mod pipeline;
pub mod spatial;
