use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use super::relation::Dataset;

const STEPGAME_TSV: &str = include_str!("../../assets/synonyms/stepgame.tsv");
const SPARQA_TSV: &str = include_str!("../../assets/synonyms/sparqa.tsv");

/// Marker label for tokens the dictionary does not know; never equals a gold label.
pub const UNKNOWN_LABEL: &str = "<unknown>";

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("synonym file line {line}: expected 'token<TAB>canonical', got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("synonym file: canonical label '{0}' does not map to itself")]
    NotFixedPoint(String),
    #[error("reading synonym file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Known(String),
    Unknown(String),
}

impl Normalized {
    pub fn known(&self) -> Option<&str> {
        match self {
            Normalized::Known(s) => Some(s),
            Normalized::Unknown(_) => None,
        }
    }

    /// The canonical label, or [`UNKNOWN_LABEL`].
    pub fn into_label(self) -> String {
        match self {
            Normalized::Known(s) => s,
            Normalized::Unknown(_) => UNKNOWN_LABEL.to_string(),
        }
    }
}

/// Lowercases, trims surrounding punctuation and collapses whitespace.
pub fn normalize_key(token: &str) -> String {
    let lowered = token.to_lowercase();
    let trimmed = lowered.trim_matches(|c: char| {
        c.is_whitespace()
            || matches!(
                c,
                '.' | ',' | '!' | '?' | '"' | '\'' | '`' | '(' | ')' | '[' | ']' | ':' | ';'
            )
    });
    trimmed.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Surface token to canonical label map for one dataset.
#[derive(Debug, Clone)]
pub struct SynonymDictionary {
    entries: BTreeMap<String, String>,
    longest_phrase: usize,
}

impl SynonymDictionary {
    pub fn builtin(dataset: Dataset) -> Self {
        let text = match dataset {
            Dataset::StepGame => STEPGAME_TSV,
            Dataset::SparQA => SPARQA_TSV,
        };
        Self::parse(text).expect("bundled synonym file is valid")
    }

    pub fn from_file(path: &Path) -> Result<Self, DictionaryError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses `token<TAB>canonical` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, DictionaryError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(token), Some(canon), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(DictionaryError::Malformed {
                    line: i + 1,
                    text: line.to_string(),
                });
            };
            let (token, canon) = (normalize_key(token), canon.trim().to_string());
            if token.is_empty() || canon.is_empty() {
                return Err(DictionaryError::Malformed {
                    line: i + 1,
                    text: line.to_string(),
                });
            }
            entries.insert(token, canon);
        }
        for canon in entries.values() {
            if entries.get(canon) != Some(canon) {
                return Err(DictionaryError::NotFixedPoint(canon.clone()));
            }
        }
        let longest_phrase = entries
            .keys()
            .map(|k| k.split(' ').count())
            .max()
            .unwrap_or(1);
        Ok(SynonymDictionary {
            entries,
            longest_phrase,
        })
    }

    pub fn normalize(&self, token: &str) -> Normalized {
        let key = normalize_key(token);
        match self.entries.get(&key) {
            Some(c) => Normalized::Known(c.clone()),
            None => Normalized::Unknown(key),
        }
    }

    pub fn canonical_labels(&self) -> impl Iterator<Item = &str> {
        let mut v: Vec<&str> = self.entries.values().map(String::as_str).collect();
        v.sort();
        v.dedup();
        v.into_iter()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Finds dictionary phrases inside free text, longest match first, and
    /// returns their canonical labels in order of first appearance.
    ///
    /// When the text contains "answer is" or "answer:", only the part after
    /// the last such marker is scanned. Single-character keys are ignored
    /// inside running text.
    pub fn scan(&self, text: &str) -> Vec<String> {
        if let Normalized::Known(c) = self.normalize(text) {
            return vec![c];
        }
        let lowered = text.to_lowercase();
        let tail = ["answer is", "answer:"]
            .iter()
            .filter_map(|m| lowered.rfind(m).map(|i| i + m.len()))
            .max()
            .map_or(lowered.as_str(), |i| &lowered[i..]);
        let words: Vec<&str> = tail
            .split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '_' || c == '\''))
            .filter(|w| !w.is_empty())
            .collect();
        let mut found: Vec<String> = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let mut matched = 0;
            for len in (1..=self.longest_phrase.min(words.len() - i)).rev() {
                let phrase = words[i..i + len].join(" ");
                if phrase.chars().count() < 2 {
                    continue;
                }
                if let Some(c) = self.entries.get(&phrase) {
                    if !found.contains(c) {
                        found.push(c.clone());
                    }
                    matched = len;
                    break;
                }
            }
            i += matched.max(1);
        }
        found
    }
}

/// Normalizes a single answer token against the built-in dictionary.
pub fn normalize_answer(token: &str, dataset: Dataset) -> Normalized {
    SynonymDictionary::builtin(dataset).normalize(token)
}

/// Normalization for free-form entity answers (blocks, object descriptions):
/// lowercase words joined by `_`, with a leading article or "block" dropped.
pub fn normalize_entity(token: &str) -> String {
    let key = normalize_key(token);
    let words: Vec<&str> = key
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect();
    let start = words
        .iter()
        .take(words.len().saturating_sub(1))
        .take_while(|w| matches!(**w, "the" | "a" | "an" | "block"))
        .count();
    words[start..].join("_")
}
