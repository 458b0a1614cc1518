use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::spatial::QuestionType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Exact,
    Partial,
    Miss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub kind: MatchKind,
    pub score: u8,
}

impl MatchResult {
    const EXACT: MatchResult = MatchResult {
        kind: MatchKind::Exact,
        score: 1,
    };
    const PARTIAL: MatchResult = MatchResult {
        kind: MatchKind::Partial,
        score: 1,
    };
    const MISS: MatchResult = MatchResult {
        kind: MatchKind::Miss,
        score: 0,
    };
}

/// Scores normalized labels.
///
/// Single-answer questions need the exact gold set. FR and CO questions whose
/// gold set has more than one label also accept any nonempty subset of the
/// gold set as a partial match; over-prediction is a miss.
pub fn score(
    predicted: &BTreeSet<String>,
    gold: &BTreeSet<String>,
    qtype: Option<QuestionType>,
) -> MatchResult {
    if predicted == gold {
        return MatchResult::EXACT;
    }
    let multi = qtype.is_some_and(QuestionType::allows_multiple) && gold.len() > 1;
    if multi && !predicted.is_empty() && predicted.is_subset(gold) {
        MatchResult::PARTIAL
    } else {
        MatchResult::MISS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rules() {
        let fr = Some(QuestionType::FR);
        assert_eq!(
            score(&set(&["left"]), &set(&["left"]), None).kind,
            MatchKind::Exact
        );
        assert_eq!(
            score(&set(&["left"]), &set(&["left", "near_to"]), fr),
            MatchResult::PARTIAL
        );
        assert_eq!(
            score(&set(&["left", "above"]), &set(&["left"]), fr),
            MatchResult::MISS
        );
        assert_eq!(
            score(&set(&[]), &set(&["left", "near_to"]), fr),
            MatchResult::MISS
        );
        // YN never gets partial credit
        assert_eq!(
            score(&set(&["yes"]), &set(&["yes", "no"]), Some(QuestionType::YN)),
            MatchResult::MISS
        );
    }
}
