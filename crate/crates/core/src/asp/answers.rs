use super::ground::Value;
use super::solve::StableModel;

/// One ground argument tuple of a query atom.
pub type AnswerTuple = Vec<Value>;

/// Argument tuples of every `query_predicate` atom in the model, in
/// lexicographic order. An empty result is the "satisfiable but no result"
/// signal.
pub fn extract_answers(model: &StableModel, query_predicate: &str) -> Vec<AnswerTuple> {
    let mut out: Vec<AnswerTuple> = model
        .with_predicate(query_predicate)
        .map(|a| a.args.clone())
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Renders a tuple as `(a,b)`.
pub fn format_tuple(t: &AnswerTuple) -> String {
    let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}
