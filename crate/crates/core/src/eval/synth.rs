use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::Example;
use crate::spatial::{Dataset, Offset, StepGameRelation};

/// A random-walk story with its ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticStory {
    pub hop: u8,
    /// `(x, r, y)`: x is in relation r to y. Shuffled; some are stated inverted.
    pub facts: Vec<(String, StepGameRelation, String)>,
    pub query: (String, String),
    pub answer: StepGameRelation,
}

impl SyntheticStory {
    /// `is/3` facts and the `query/2` fact as program text.
    pub fn program(&self) -> String {
        let mut out = String::new();
        for (x, r, y) in &self.facts {
            out.push_str(&format!("is({x},{},{y}).\n", r.asp_name()));
        }
        out.push_str(&format!("query({},{}).\n", self.query.0, self.query.1));
        out
    }

    pub fn context(&self) -> String {
        self.facts
            .iter()
            .map(|(x, r, y)| {
                format!(
                    "{} is {} {}.",
                    x.to_uppercase(),
                    phrase(*r),
                    y.to_uppercase()
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn question(&self) -> String {
        format!(
            "What is the relation of the agent {} to the agent {}?",
            self.query.0.to_uppercase(),
            self.query.1.to_uppercase()
        )
    }

    pub fn to_example(&self, id: String) -> Example {
        Example {
            id,
            dataset: Dataset::StepGame,
            context: self.context(),
            question: self.question(),
            choices: None,
            gold: BTreeSet::from([self.answer.label().to_string()]),
            hop: Some(self.hop),
            qtype: None,
        }
    }
}

fn phrase(r: StepGameRelation) -> &'static str {
    match r {
        StepGameRelation::Left => "to the left of",
        StepGameRelation::Right => "to the right of",
        StepGameRelation::Top => "above",
        StepGameRelation::Down => "below",
        StepGameRelation::TopLeft => "to the upper-left of",
        StepGameRelation::TopRight => "to the upper-right of",
        StepGameRelation::DownLeft => "to the lower-left of",
        StepGameRelation::DownRight => "to the lower-right of",
        StepGameRelation::Overlap => "overlapping",
    }
}

/// Walks `hop` random steps from a start object and asks for the relation
/// between the two ends. `hop` must be in 1..=25.
pub fn generate_story<R: Rng>(hop: u8, rng: &mut R) -> SyntheticStory {
    assert!((1..=25).contains(&hop), "hop out of range");
    let mut names: Vec<char> = ('a'..='z').collect();
    names.shuffle(rng);
    let names: Vec<String> = names[..=hop as usize]
        .iter()
        .map(|c| c.to_string())
        .collect();

    let mut pos = vec![Offset::default()];
    let mut facts = Vec::new();
    for i in 0..hop as usize {
        let r = *StepGameRelation::ALL.choose(rng).unwrap();
        pos.push(pos[i] + r.to_offset());
        // names[i + 1] is in relation r to names[i]
        if rng.gen_bool(0.5) {
            facts.push((names[i + 1].clone(), r, names[i].clone()));
        } else {
            facts.push((names[i].clone(), r.inverse(), names[i + 1].clone()));
        }
    }
    facts.shuffle(rng);

    let last = hop as usize;
    let (a, b) = if rng.gen_bool(0.5) {
        (last, 0)
    } else {
        (0, last)
    };
    let answer = StepGameRelation::from_offset(pos[a] - pos[b]);
    SyntheticStory {
        hop,
        facts,
        query: (names[a].clone(), names[b].clone()),
        answer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_hop_states_the_answer() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let s = generate_story(1, &mut rng);
            let (x, r, y) = &s.facts[0];
            let expected = if (x, y) == (&s.query.0, &s.query.1) {
                *r
            } else {
                r.inverse()
            };
            assert_eq!(s.answer, expected);
        }
    }

    #[test]
    fn program_text() {
        let s = SyntheticStory {
            hop: 1,
            facts: vec![("a".into(), StepGameRelation::TopLeft, "b".into())],
            query: ("a".into(), "b".into()),
            answer: StepGameRelation::TopLeft,
        };
        assert_eq!(s.program(), "is(a,top_left,b).\nquery(a,b).\n");
        assert_eq!(s.context(), "A is to the upper-left of B.");
    }
}
