use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::spatial::{Dataset, QuestionType};

/// One question with its context, candidate choices and gold labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub dataset: Dataset,
    pub context: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<String>>,
    pub gold: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hop: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qtype: Option<QuestionType>,
}

impl Example {
    /// Checks the per-dataset shape: StepGame needs a hop and a single gold
    /// label, SparQA needs a question type and a nonempty gold set.
    pub fn validate(&self) -> Result<(), String> {
        match self.dataset {
            Dataset::StepGame => {
                if !matches!(self.hop, Some(1..=10)) {
                    return Err(format!("example {}: hop must be in 1..=10", self.id));
                }
                if self.gold.len() != 1 {
                    return Err(format!("example {}: expected one gold label", self.id));
                }
            }
            Dataset::SparQA => {
                if self.qtype.is_none() {
                    return Err(format!("example {}: missing question type", self.id));
                }
                if self.gold.is_empty() {
                    return Err(format!("example {}: empty gold set", self.id));
                }
            }
        }
        Ok(())
    }

    /// Choices joined for prompting; StepGame falls back to the nine relations.
    pub fn choices_text(&self) -> String {
        match &self.choices {
            Some(c) => c.join(", "),
            None => match self.dataset {
                Dataset::StepGame => crate::spatial::StepGameRelation::ALL
                    .iter()
                    .map(|r| r.label())
                    .collect::<Vec<_>>()
                    .join(", "),
                Dataset::SparQA => String::new(),
            },
        }
    }

    /// Row label of the accuracy table this example belongs to.
    pub fn cell(&self) -> String {
        match (self.hop, self.qtype) {
            (Some(k), _) => format!("k={k}"),
            (None, Some(q)) => q.as_str().to_string(),
            (None, None) => "all".to_string(),
        }
    }
}
