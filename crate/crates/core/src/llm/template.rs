use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::GatewayError;
use crate::spatial::QuestionType;

const DIRECT: &str = include_str!("../../assets/templates/direct.txt");
const FACTS_GEN_STEPGAME: &str = include_str!("../../assets/templates/facts_gen_stepgame.txt");
const FACTS_GEN_SPARQA: &str = include_str!("../../assets/templates/facts_gen_sparqa.txt");
const REFINE_WITH_ERROR: &str = include_str!("../../assets/templates/refine_with_error.txt");
const FACTS_RULES_EXTRACT: &str = include_str!("../../assets/templates/facts_rules_extract.txt");
const FACTS_RULES_REASON: &str = include_str!("../../assets/templates/facts_rules_reason.txt");

const FEWSHOT_FR: &str = include_str!("../../assets/fewshot/fr.txt");
const FEWSHOT_FB: &str = include_str!("../../assets/fewshot/fb.txt");
const FEWSHOT_YN: &str = include_str!("../../assets/fewshot/yn.txt");
const FEWSHOT_CO: &str = include_str!("../../assets/fewshot/co.txt");

/// Natural-language rule statements handed to the Facts+Rules reasoning stage.
pub const RULES_STEPGAME: &str = include_str!("../../assets/templates/rules_stepgame.txt");
pub const RULES_SPARQA: &str = include_str!("../../assets/templates/rules_sparqa.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Direct,
    FactsGenStepgame,
    FactsGenSparqa,
    RefineWithError,
    FactsRulesExtract,
    FactsRulesReason,
}

impl TemplateId {
    pub const ALL: [TemplateId; 6] = [
        TemplateId::Direct,
        TemplateId::FactsGenStepgame,
        TemplateId::FactsGenSparqa,
        TemplateId::RefineWithError,
        TemplateId::FactsRulesExtract,
        TemplateId::FactsRulesReason,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::Direct => "direct",
            TemplateId::FactsGenStepgame => "facts_gen_stepgame",
            TemplateId::FactsGenSparqa => "facts_gen_sparqa",
            TemplateId::RefineWithError => "refine_with_error",
            TemplateId::FactsRulesExtract => "facts_rules_extract",
            TemplateId::FactsRulesReason => "facts_rules_reason",
        }
    }

    /// Raw template text with `{{var}}` placeholders.
    pub fn text(self) -> &'static str {
        match self {
            TemplateId::Direct => DIRECT,
            TemplateId::FactsGenStepgame => FACTS_GEN_STEPGAME,
            TemplateId::FactsGenSparqa => FACTS_GEN_SPARQA,
            TemplateId::RefineWithError => REFINE_WITH_ERROR,
            TemplateId::FactsRulesExtract => FACTS_RULES_EXTRACT,
            TemplateId::FactsRulesReason => FACTS_RULES_REASON,
        }
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = Vec::new();
        for c in placeholder_re().captures_iter(self.text()) {
            let name = c.get(1).unwrap().as_str();
            if !names.contains(&name) {
                names.push(name);
            }
        }
        names
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| GatewayError::UnknownTemplate(s.to_string()))
    }
}

/// Few-shot query example for a SparQA question type.
pub fn fewshot(qtype: QuestionType) -> &'static str {
    match qtype {
        QuestionType::FR => FEWSHOT_FR,
        QuestionType::FB => FEWSHOT_FB,
        QuestionType::YN => FEWSHOT_YN,
        QuestionType::CO => FEWSHOT_CO,
    }
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}").unwrap())
}

/// A single completion request before rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRequest {
    pub template_id: TemplateId,
    pub variables: BTreeMap<String, String>,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl PromptRequest {
    pub fn new(template_id: TemplateId, model_id: impl Into<String>) -> Self {
        PromptRequest {
            template_id,
            variables: BTreeMap::new(),
            model_id: model_id.into(),
            temperature: 0.0,
            max_tokens: 1024,
        }
    }

    pub fn var(mut self, name: &str, value: impl Into<String>) -> Self {
        self.variables.insert(name.to_string(), value.into());
        self
    }
}

/// Substitutes every placeholder of the request's template.
///
/// `{{fewshot}}` falls back to the example for the `qtype` variable when not
/// bound directly.
pub fn render_prompt(req: &PromptRequest) -> Result<String, GatewayError> {
    let text = req.template_id.text();
    let mut out = String::with_capacity(text.len() + 256);
    let mut last = 0;
    for c in placeholder_re().captures_iter(text) {
        let whole = c.get(0).unwrap();
        let name = c.get(1).unwrap().as_str();
        out.push_str(&text[last..whole.start()]);
        out.push_str(&lookup(req, name)?);
        last = whole.end();
    }
    out.push_str(&text[last..]);
    Ok(out)
}

fn lookup(req: &PromptRequest, name: &str) -> Result<String, GatewayError> {
    if let Some(v) = req.variables.get(name) {
        return Ok(v.trim_end().to_string());
    }
    if name == "fewshot" {
        if let Some(q) = req.variables.get("qtype") {
            let q: QuestionType = q
                .parse()
                .map_err(|_| GatewayError::MissingVariable("fewshot".into()))?;
            return Ok(fewshot(q).trim_end().to_string());
        }
    }
    Err(GatewayError::MissingVariable(name.to_string()))
}
