use crate::asp::{AnswerTuple, StableModel, Value};
use crate::eval::Example;
use crate::spatial::{
    answer_predicate, normalize_entity, Dataset, Normalized, QuestionType, SynonymDictionary,
    UNKNOWN_LABEL,
};

/// Answer tuples for an example, with yes/no questions already decided.
///
/// A yes/no question is answered `yes` iff any atom of the query predicate is
/// in the model, so it never produces an empty answer set.
pub fn model_answers(model: &StableModel, ex: &Example) -> Vec<AnswerTuple> {
    let pred = answer_predicate(ex.dataset);
    if ex.qtype == Some(QuestionType::YN) {
        let yes = model.with_predicate(pred).next().is_some();
        let label = if yes { "yes" } else { "no" };
        return vec![vec![Value::Sym(label.to_string())]];
    }
    crate::asp::extract_answers(model, pred)
}

/// Converts answer tuples into canonical labels; unknown tokens become
/// [`UNKNOWN_LABEL`] rather than vanishing.
pub fn tuples_to_labels(
    tuples: &[AnswerTuple],
    ex: &Example,
    dict: &SynonymDictionary,
) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in tuples {
        let token = match t.as_slice() {
            [v] => v.text(),
            _ => crate::asp::format_tuple(t),
        };
        let label = if uses_entities(ex) {
            match_choice(&normalize_entity(&token), ex)
        } else {
            dict.normalize(&token).into_label()
        };
        if !out.contains(&label) {
            out.push(label);
        }
    }
    out.sort();
    out
}

/// Labels found in a free-text answer.
pub fn text_to_labels(text: &str, ex: &Example, dict: &SynonymDictionary) -> Vec<String> {
    let mut labels: Vec<String> = if uses_entities(ex) {
        answer_tail(text)
            .split([',', ';', '\n'])
            .flat_map(|p| p.split(" and "))
            .map(normalize_entity)
            .filter(|e| !e.is_empty())
            .map(|e| match_choice(&e, ex))
            .collect()
    } else {
        let allowed = allowed_labels(ex);
        dict.scan(text)
            .into_iter()
            .filter(|l| allowed.is_none_or(|a| a.contains(&l.as_str())))
            .collect()
    };
    labels.sort();
    labels.dedup();
    if labels.is_empty() {
        labels.push(UNKNOWN_LABEL.to_string());
    }
    labels
}

fn uses_entities(ex: &Example) -> bool {
    matches!(ex.qtype, Some(QuestionType::FB | QuestionType::CO))
}

fn allowed_labels(ex: &Example) -> Option<&'static [&'static str]> {
    match (ex.dataset, ex.qtype) {
        (Dataset::SparQA, Some(QuestionType::YN)) => Some(&["yes", "no"]),
        (Dataset::SparQA, _) => Some(&[
            "left", "right", "above", "below", "near_to", "far_from", "touching", "dk",
        ]),
        (Dataset::StepGame, _) => None,
    }
}

fn answer_tail(text: &str) -> &str {
    let lowered = text.to_lowercase();
    ["answer is", "answer:"]
        .iter()
        .filter_map(|m| lowered.rfind(m).map(|i| i + m.len()))
        .max()
        // lowercasing can shift byte offsets for non-ASCII text
        .filter(|&i| text.is_char_boundary(i) && lowered.len() == text.len())
        .map_or(text, |i| &text[i..])
}

/// Maps an entity token onto the normalized form of a matching choice.
fn match_choice(entity: &str, ex: &Example) -> String {
    let Some(choices) = &ex.choices else {
        return entity.to_string();
    };
    let normalized: Vec<String> = choices.iter().map(|c| normalize_entity(c)).collect();
    if let Some(c) = normalized.iter().find(|c| *c == entity) {
        return c.clone();
    }
    let prefix = format!("{entity}_");
    match normalized.iter().filter(|c| c.starts_with(&prefix)).count() {
        1 => normalized
            .into_iter()
            .find(|c| c.starts_with(&prefix))
            .unwrap(),
        _ => entity.to_string(),
    }
}

/// Canonical label for a single token, used when loading gold answers.
pub fn gold_label(token: &str, dataset: Dataset, qtype: Option<QuestionType>) -> String {
    if matches!(qtype, Some(QuestionType::FB | QuestionType::CO)) {
        return normalize_entity(token);
    }
    match SynonymDictionary::builtin(dataset).normalize(token) {
        Normalized::Known(l) => l,
        Normalized::Unknown(k) => k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn ex(dataset: Dataset, qtype: Option<QuestionType>, choices: Option<Vec<&str>>) -> Example {
        Example {
            id: "x".into(),
            dataset,
            context: String::new(),
            question: String::new(),
            choices: choices.map(|c| c.into_iter().map(String::from).collect()),
            gold: BTreeSet::new(),
            hop: None,
            qtype,
        }
    }

    #[test]
    fn stepgame_text() {
        let d = SynonymDictionary::builtin(Dataset::StepGame);
        let e = ex(Dataset::StepGame, None, None);
        assert_eq!(
            text_to_labels("The answer is: upper-left.", &e, &d),
            ["top-left"]
        );
        assert_eq!(text_to_labels("right", &e, &d), ["right"]);
        assert_eq!(text_to_labels("no idea", &e, &d), [UNKNOWN_LABEL]);
    }

    #[test]
    fn stepgame_tuples() {
        let d = SynonymDictionary::builtin(Dataset::StepGame);
        let e = ex(Dataset::StepGame, None, None);
        let t = vec![vec![Value::Sym("down_right".into())]];
        assert_eq!(tuples_to_labels(&t, &e, &d), ["down-right"]);
    }

    #[test]
    fn block_choice() {
        let d = SynonymDictionary::builtin(Dataset::SparQA);
        let e = ex(
            Dataset::SparQA,
            Some(QuestionType::FB),
            Some(vec!["A", "B", "C"]),
        );
        assert_eq!(text_to_labels("The answer is block B.", &e, &d), ["b"]);
        let t = vec![vec![Value::Sym("a".into())], vec![Value::Sym("c".into())]];
        assert_eq!(tuples_to_labels(&t, &e, &d), ["a", "c"]);
    }

    #[test]
    fn object_choice_prefix() {
        let d = SynonymDictionary::builtin(Dataset::SparQA);
        let e = ex(
            Dataset::SparQA,
            Some(QuestionType::CO),
            Some(vec![
                "the big blue circle",
                "the medium yellow square which is in block A",
            ]),
        );
        let t = vec![vec![Value::Sym("medium_yellow_square".into())]];
        assert_eq!(
            tuples_to_labels(&t, &e, &d),
            ["medium_yellow_square_which_is_in_block_a"]
        );
    }

    #[test]
    fn yes_no_filter() {
        let d = SynonymDictionary::builtin(Dataset::SparQA);
        let e = ex(Dataset::SparQA, Some(QuestionType::YN), None);
        assert_eq!(text_to_labels("Yes, it is above.", &e, &d), ["yes"]);
    }

    #[test]
    fn gold_labels() {
        assert_eq!(
            gold_label("upper-left", Dataset::StepGame, None),
            "top-left"
        );
        assert_eq!(
            gold_label("DK", Dataset::SparQA, Some(QuestionType::FR)),
            "dk"
        );
        assert_eq!(
            gold_label("Block A", Dataset::SparQA, Some(QuestionType::FB)),
            "a"
        );
    }
}
