use crate::asp::{parse_program, ParseError, Program};

use super::relation::Dataset;

const STEPGAME_LP: &str = include_str!("../../assets/knowledge/stepgame.lp");
const SPARQA_LP: &str = include_str!("../../assets/knowledge/sparqa.lp");

/// Source text of the bundled knowledge program for `dataset`.
pub fn knowledge_text(dataset: Dataset) -> &'static str {
    match dataset {
        Dataset::StepGame => STEPGAME_LP,
        Dataset::SparQA => SPARQA_LP,
    }
}

/// Coordinate chain-linking rules: anchors the second queried object at
/// (0,0), propagates `location/3` through `is/3` in both directions, and
/// derives `answer(R)` from the sign of the first object's coordinates.
pub fn stepgame_knowledge() -> Program {
    parse_program(STEPGAME_LP).expect("bundled StepGame knowledge parses")
}

/// Inverse, symmetric and transitive closure of `is/3`, plus lifting of
/// directional block relations to the objects they contain.
pub fn sparqa_knowledge() -> Program {
    parse_program(SPARQA_LP).expect("bundled SparQA knowledge parses")
}

pub fn knowledge_program(dataset: Dataset) -> Program {
    match dataset {
        Dataset::StepGame => stepgame_knowledge(),
        Dataset::SparQA => sparqa_knowledge(),
    }
}

/// Predicate whose atoms carry the answer for `dataset`.
pub fn answer_predicate(dataset: Dataset) -> &'static str {
    match dataset {
        Dataset::StepGame => "answer",
        Dataset::SparQA => "query",
    }
}

/// Parses a user-supplied replacement knowledge program.
pub fn parse_knowledge(text: &str) -> Result<Program, ParseError> {
    parse_program(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::{check_safety, ground, run_text, stratify, GroundOptions, SolverOutcome};

    fn answers(facts: &str, dataset: Dataset, bound: i64) -> Vec<String> {
        let text = format!("{facts}\n{}", knowledge_text(dataset));
        let opts = GroundOptions {
            domain_bound: bound,
            ..GroundOptions::default()
        };
        match run_text(&text, &opts) {
            SolverOutcome::Model(m) => crate::asp::extract_answers(&m, answer_predicate(dataset))
                .iter()
                .map(|t| t.iter().map(|v| v.text()).collect::<Vec<_>>().join(","))
                .collect(),
            SolverOutcome::Failed(e) => panic!("{e}"),
        }
    }

    #[test]
    fn knowledge_programs_are_safe_and_stratified() {
        for ds in [Dataset::StepGame, Dataset::SparQA] {
            let p = knowledge_program(ds);
            check_safety(&p).unwrap();
            let g = ground(&p, &GroundOptions::default()).unwrap();
            stratify(&g).unwrap();
        }
    }

    #[test]
    fn two_hop_left_chain() {
        // oracle: c = (0,0), b = (-1,0), a = (-2,0)
        assert_eq!(
            answers(
                "is(a,left,b). is(b,left,c). query(a,c).",
                Dataset::StepGame,
                3
            ),
            vec!["left"]
        );
    }

    #[test]
    fn one_hop_identity() {
        assert_eq!(
            answers("is(a,top,b). query(a,b).", Dataset::StepGame, 2),
            vec!["top"]
        );
    }

    #[test]
    fn shared_anchor() {
        // oracle: c = (0,0), a = (1,0), b = a - (0,1) = (1,-1)
        assert_eq!(
            answers(
                "is(a,top,b). is(a,right,c). query(b,c).",
                Dataset::StepGame,
                3
            ),
            vec!["down_right"]
        );
    }

    #[test]
    fn disconnected_chain_has_no_answer() {
        assert!(answers(
            "is(a,top,b). is(c,left,d). query(a,d).",
            Dataset::StepGame,
            3
        )
        .is_empty());
    }

    fn model_atoms(facts: &str) -> Vec<String> {
        let text = format!("{facts}\n{}", SPARQA_LP);
        match run_text(&text, &GroundOptions::default()) {
            SolverOutcome::Model(m) => m.atoms.iter().map(|a| a.to_string()).collect(),
            SolverOutcome::Failed(e) => panic!("{e}"),
        }
    }

    #[test]
    fn inverse_rule() {
        assert!(model_atoms("is(o1,left,o2).").contains(&"is(o2,right,o1)".to_string()));
    }

    #[test]
    fn transitive_rule() {
        assert!(
            model_atoms("is(o1,left,o2). is(o2,left,o3).").contains(&"is(o1,left,o3)".to_string())
        );
    }

    #[test]
    fn containment_lifting() {
        let m = model_atoms(
            "block(a). block(b). is(a,left,b). object(o1,small,black,circle,a). object(o2,big,blue,square,b).",
        );
        assert!(m.contains(&"is(o1,left,o2)".to_string()));
        assert!(m.contains(&"is(o2,right,o1)".to_string()));
        // objects in the same block gain nothing from the block relation
        assert!(!m
            .iter()
            .any(|a| a.starts_with("is(o1,") && a.ends_with("o1)")));
    }

    #[test]
    fn symmetric_rule() {
        assert!(model_atoms("is(o1,near_to,o2).").contains(&"is(o2,near_to,o1)".to_string()));
    }
}
