//! Spatial vocabularies, the fixed knowledge programs and answer normalization.

mod knowledge;
mod relation;
mod synonyms;

pub use knowledge::{
    answer_predicate, knowledge_program, knowledge_text, parse_knowledge, sparqa_knowledge,
    stepgame_knowledge,
};
pub use relation::{Dataset, Offset, QuestionType, SparqaRelation, StepGameRelation};
pub use synonyms::{
    normalize_answer, normalize_entity, normalize_key, DictionaryError, Normalized,
    SynonymDictionary, UNKNOWN_LABEL,
};
