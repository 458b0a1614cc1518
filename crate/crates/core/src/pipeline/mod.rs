//! The three answering strategies: direct prompting, Facts+Rules, and the
//! LLM+ASP pipeline with solver-error feedback.

mod classify;
mod interpret;
mod sanitize;

use std::fmt;
use std::str::FromStr;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asp::{
    parse_program, run_program, GroundOptions, Program, SolverOutcome, DEFAULT_DOMAIN_BOUND,
    DEFAULT_GROUND_CEILING,
};
use crate::eval::Example;
use crate::llm::{Gateway, PromptRequest, TemplateId, RULES_SPARQA, RULES_STEPGAME};
use crate::spatial::{
    answer_predicate, knowledge_program, Dataset, QuestionType, SynonymDictionary, UNKNOWN_LABEL,
};

pub use classify::{classify_outcome, ErrorClass};
pub use interpret::{gold_label, model_answers, text_to_labels, tuples_to_labels};
pub use sanitize::sanitize_program;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Direct,
    FactsRules,
    Asp,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::FactsRules => "facts-rules",
            Strategy::Asp => "asp",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Strategy::Direct),
            "facts-rules" | "facts_rules" => Ok(Strategy::FactsRules),
            "asp" => Ok(Strategy::Asp),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Number of programs evaluated per example, counting the first one.
    pub max_iterations: usize,
    /// Integer domain bound; `None` picks `hop + 1` for StepGame and 100 otherwise.
    pub domain_bound: Option<i64>,
    pub ceiling: u64,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Replacement knowledge program text.
    pub knowledge: Option<String>,
    /// Replacement synonym dictionary.
    pub synonyms: Option<SynonymDictionary>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_iterations: 3,
            domain_bound: None,
            ceiling: DEFAULT_GROUND_CEILING,
            model_id: "mock".to_string(),
            temperature: 0.0,
            max_tokens: 1024,
            knowledge: None,
            synonyms: None,
        }
    }
}

impl PipelineConfig {
    fn domain_bound_for(&self, ex: &Example) -> i64 {
        self.domain_bound.unwrap_or(match (ex.dataset, ex.hop) {
            (Dataset::StepGame, Some(k)) => i64::from(k) + 1,
            _ => DEFAULT_DOMAIN_BOUND,
        })
    }

    fn dictionary(&self, dataset: Dataset) -> SynonymDictionary {
        self.synonyms
            .clone()
            .unwrap_or_else(|| SynonymDictionary::builtin(dataset))
    }

    fn knowledge(&self, dataset: Dataset) -> Result<Program, String> {
        match &self.knowledge {
            Some(text) => parse_program(text).map_err(|e| format!("knowledge program: {e}")),
            None => Ok(knowledge_program(dataset)),
        }
    }

    fn request(&self, template: TemplateId) -> PromptRequest {
        let mut r = PromptRequest::new(template, self.model_id.clone());
        r.temperature = self.temperature;
        r.max_tokens = self.max_tokens;
        r
    }
}

/// One gateway exchange inside a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub fingerprint: String,
    pub response: String,
}

/// One evaluated candidate program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub program: String,
    pub error_class: ErrorClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub answers: Vec<String>,
}

/// Everything that happened while answering one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub example_id: String,
    pub dataset: Dataset,
    pub strategy: Strategy,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hop: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qtype: Option<QuestionType>,
    pub gold: Vec<String>,
    pub stages: Vec<StageRecord>,
    pub iterations: Vec<IterationRecord>,
    pub answers: Vec<String>,
    pub final_class: ErrorClass,
    pub executable: bool,
    /// Facts+Rules only: stage-one output did not parse as facts.
    pub malformed_intermediate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gateway_error: Option<String>,
    pub gateway_calls: usize,
    /// Sum of completion latencies as reported by the backend.
    pub latency_ms: u64,
}

impl PipelineTrace {
    fn new(ex: &Example, strategy: Strategy, cfg: &PipelineConfig) -> Self {
        PipelineTrace {
            example_id: ex.id.clone(),
            dataset: ex.dataset,
            strategy,
            model_id: cfg.model_id.clone(),
            hop: ex.hop,
            qtype: ex.qtype,
            gold: ex.gold.iter().cloned().collect(),
            stages: Vec::new(),
            iterations: Vec::new(),
            answers: Vec::new(),
            final_class: ErrorClass::None,
            executable: false,
            malformed_intermediate: false,
            gateway_error: None,
            gateway_calls: 0,
            latency_ms: 0,
        }
    }

    /// Index of the first iteration that produced an answer, if any.
    pub fn executable_at(&self) -> Option<usize> {
        self.iterations
            .iter()
            .find(|r| r.error_class == ErrorClass::None)
            .map(|r| r.iteration)
    }

    fn call(&mut self, gw: &Gateway, stage: &str, req: &PromptRequest) -> Result<String, String> {
        self.gateway_calls += 1;
        match gw.complete(req) {
            Ok(ex) => {
                self.latency_ms += ex.latency_ms;
                self.stages.push(StageRecord {
                    stage: stage.to_string(),
                    fingerprint: ex.fingerprint,
                    response: ex.response.clone(),
                });
                Ok(ex.response)
            }
            Err(e) => {
                let msg = e.to_string();
                self.gateway_error = Some(msg.clone());
                self.final_class = ErrorClass::Gateway;
                self.answers = vec![UNKNOWN_LABEL.to_string()];
                Err(msg)
            }
        }
    }
}

fn question_vars(req: PromptRequest, ex: &Example) -> PromptRequest {
    let req = req
        .var("context", ex.context.clone())
        .var("question", ex.question.clone())
        .var("choices", ex.choices_text());
    match ex.qtype {
        Some(q) => req.var("qtype", q.as_str()),
        None => req,
    }
}

/// One call with the direct-answer template.
pub fn run_direct(ex: &Example, cfg: &PipelineConfig, gw: &Gateway) -> PipelineTrace {
    let mut t = PipelineTrace::new(ex, Strategy::Direct, cfg);
    let req = question_vars(cfg.request(TemplateId::Direct), ex);
    if let Ok(text) = t.call(gw, "direct", &req) {
        t.answers = text_to_labels(&text, ex, &cfg.dictionary(ex.dataset));
    }
    t
}

/// Fact extraction followed by natural-language reasoning over stated rules.
/// Stage-one output is passed on verbatim even when it is malformed.
pub fn run_facts_rules(ex: &Example, cfg: &PipelineConfig, gw: &Gateway) -> PipelineTrace {
    let mut t = PipelineTrace::new(ex, Strategy::FactsRules, cfg);
    let req = question_vars(cfg.request(TemplateId::FactsRulesExtract), ex);
    let Ok(facts) = t.call(gw, "extract", &req) else {
        return t;
    };
    t.malformed_intermediate = !facts_look_valid(&facts);
    let rules = match ex.dataset {
        Dataset::StepGame => RULES_STEPGAME,
        Dataset::SparQA => RULES_SPARQA,
    };
    let req = question_vars(cfg.request(TemplateId::FactsRulesReason), ex)
        .var("facts", facts)
        .var("rules", rules);
    if let Ok(text) = t.call(gw, "reason", &req) {
        t.answers = text_to_labels(&text, ex, &cfg.dictionary(ex.dataset));
    }
    t
}

fn facts_look_valid(text: &str) -> bool {
    match parse_program(&sanitize_program(text)) {
        Ok(p) => {
            !p.rules.is_empty()
                && p.rules
                    .iter()
                    .all(|r| r.body.is_empty() && r.head.is_some())
        }
        Err(_) => false,
    }
}

/// Result of evaluating one candidate program against the knowledge program.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub class: ErrorClass,
    /// Error string in `CLASS: detail @ line:col` form; quoted verbatim on refinement.
    pub message: Option<String>,
    pub answers: Vec<String>,
}

/// Parses `candidate`, appends the knowledge program, solves and interprets.
pub fn evaluate_candidate(candidate: &str, ex: &Example, cfg: &PipelineConfig) -> Evaluation {
    let knowledge = match cfg.knowledge(ex.dataset) {
        Ok(k) => k,
        Err(msg) => {
            return Evaluation {
                class: ErrorClass::Parse,
                message: Some(msg),
                answers: Vec::new(),
            }
        }
    };
    let outcome = match parse_program(candidate) {
        Ok(mut p) => {
            p.extend(knowledge);
            let opts = GroundOptions {
                domain_bound: cfg.domain_bound_for(ex),
                ceiling: cfg.ceiling,
            };
            run_program(&p, &opts)
        }
        Err(e) => SolverOutcome::Failed(e.into()),
    };
    let tuples = outcome
        .model()
        .map(|m| model_answers(m, ex))
        .unwrap_or_default();
    let class = classify_outcome(&outcome, &tuples);
    let message = match (&outcome, class) {
        (SolverOutcome::Failed(e), _) => Some(e.to_string()),
        (_, ErrorClass::NoResult) => Some(format!(
            "NO_RESULT: the program has a stable model but no '{}' atom",
            answer_predicate(ex.dataset)
        )),
        _ => None,
    };
    let answers = tuples_to_labels(&tuples, ex, &cfg.dictionary(ex.dataset));
    Evaluation {
        class,
        message,
        answers,
    }
}

/// Asks for a whole corrected program, quoting the solver message verbatim.
pub fn refine_program(
    program: &str,
    message: &str,
    gw: &Gateway,
    cfg: &PipelineConfig,
) -> Result<String, crate::llm::GatewayError> {
    gw.complete(&refine_request(program, message, cfg))
        .map(|ex| sanitize_program(&ex.response))
}

fn refine_request(program: &str, message: &str, cfg: &PipelineConfig) -> PromptRequest {
    cfg.request(TemplateId::RefineWithError)
        .var("program", program)
        .var("error", message)
}

/// Facts generation, then up to `max_iterations` evaluated programs with
/// error feedback between them.
pub fn run_asp_pipeline(ex: &Example, cfg: &PipelineConfig, gw: &Gateway) -> PipelineTrace {
    let mut t = PipelineTrace::new(ex, Strategy::Asp, cfg);
    let template = match ex.dataset {
        Dataset::StepGame => TemplateId::FactsGenStepgame,
        Dataset::SparQA => TemplateId::FactsGenSparqa,
    };
    let req = question_vars(cfg.request(template), ex);
    let mut program = match t.call(gw, "facts", &req) {
        Ok(text) => sanitize_program(&text),
        Err(msg) => {
            t.iterations.push(gateway_record(0, String::new(), msg));
            return t;
        }
    };
    let max = cfg.max_iterations.max(1);
    for i in 0..max {
        let ev = evaluate_candidate(&program, ex, cfg);
        debug!("{} iteration {i}: {}", ex.id, ev.class);
        t.iterations.push(IterationRecord {
            iteration: i,
            program: program.clone(),
            error_class: ev.class,
            message: ev.message.clone(),
            answers: ev.answers.clone(),
        });
        t.final_class = ev.class;
        if ev.class == ErrorClass::None {
            t.answers = ev.answers;
            t.executable = true;
            return t;
        }
        if i + 1 == max {
            break;
        }
        let req = refine_request(&program, ev.message.as_deref().unwrap_or_default(), cfg);
        match t.call(gw, &format!("refine-{}", i + 1), &req) {
            Ok(text) => program = sanitize_program(&text),
            Err(msg) => {
                t.iterations.push(gateway_record(i + 1, program, msg));
                return t;
            }
        }
    }
    t.answers = vec![UNKNOWN_LABEL.to_string()];
    t
}

fn gateway_record(iteration: usize, program: String, msg: String) -> IterationRecord {
    IterationRecord {
        iteration,
        program,
        error_class: ErrorClass::Gateway,
        message: Some(msg),
        answers: Vec::new(),
    }
}

pub fn run_example(
    strategy: Strategy,
    ex: &Example,
    cfg: &PipelineConfig,
    gw: &Gateway,
) -> PipelineTrace {
    match strategy {
        Strategy::Direct => run_direct(ex, cfg, gw),
        Strategy::FactsRules => run_facts_rules(ex, cfg, gw),
        Strategy::Asp => run_asp_pipeline(ex, cfg, gw),
    }
}

/// Runs a batch on a pool of `jobs` workers (0 = rayon default); traces come
/// back sorted by example id.
pub fn run_batch(
    strategy: Strategy,
    examples: &[Example],
    cfg: &PipelineConfig,
    gw: &Gateway,
    jobs: usize,
) -> Vec<PipelineTrace> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let mut traces: Vec<PipelineTrace> = pool.install(|| {
        examples
            .par_iter()
            .map(|ex| run_example(strategy, ex, cfg, gw))
            .collect()
    });
    traces.sort_by(|a, b| a.example_id.cmp(&b.example_id));
    traces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::MockBackend;
    use std::collections::BTreeSet;

    fn stepgame(hop: u8) -> Example {
        Example {
            id: "s1".into(),
            dataset: Dataset::StepGame,
            context: "A is left of B. B is left of C.".into(),
            question: "What is the relation of A to C?".into(),
            choices: None,
            gold: BTreeSet::from(["left".to_string()]),
            hop: Some(hop),
            qtype: None,
        }
    }

    fn sparqa(qtype: QuestionType, gold: &str) -> Example {
        Example {
            id: "q1".into(),
            dataset: Dataset::SparQA,
            context: "Two blocks.".into(),
            question: "Is it?".into(),
            choices: None,
            gold: BTreeSet::from([gold.to_string()]),
            hop: None,
            qtype: Some(qtype),
        }
    }

    fn cfg() -> PipelineConfig {
        PipelineConfig::default()
    }

    #[test]
    fn direct_answers() {
        let gw = Gateway::new(MockBackend::sequence(["right"]));
        let t = run_direct(&stepgame(1), &cfg(), &gw);
        assert_eq!(t.answers, ["right"]);
        assert_eq!(t.gateway_calls, 1);

        let gw = Gateway::new(MockBackend::sequence(["The answer is: upper-left."]));
        assert_eq!(run_direct(&stepgame(1), &cfg(), &gw).answers, ["top-left"]);
    }

    #[test]
    fn direct_gateway_failure() {
        let gw = Gateway::new(crate::llm::ReplayBackend::new(Default::default()));
        let t = run_direct(&stepgame(1), &cfg(), &gw);
        assert_eq!(t.answers, [UNKNOWN_LABEL]);
        assert_eq!(t.final_class, ErrorClass::Gateway);
        assert!(t.gateway_error.unwrap().contains("fingerprint"));
    }

    #[test]
    fn facts_rules_two_stages() {
        let gw = Gateway::new(MockBackend::sequence([
            "is(a,left,b). is(b,left,c).",
            "left",
        ]));
        let t = run_facts_rules(&stepgame(2), &cfg(), &gw);
        assert_eq!(t.answers, ["left"]);
        assert_eq!(t.gateway_calls, 2);
        assert!(!t.malformed_intermediate);

        let gw = Gateway::new(MockBackend::sequence([
            "A is left of B",
            "The answer is: left",
        ]));
        let t = run_facts_rules(&stepgame(2), &cfg(), &gw);
        assert_eq!(t.answers, ["left"]);
        assert!(t.malformed_intermediate);
        assert!(t.stages[1].response.contains("left"));
    }

    #[test]
    fn facts_rules_yes_no() {
        let gw = Gateway::new(MockBackend::sequence(["is(x,above,y).", "Yes"]));
        let t = run_facts_rules(&sparqa(QuestionType::YN, "yes"), &cfg(), &gw);
        assert_eq!(t.answers, ["yes"]);
    }

    #[test]
    fn asp_first_try() {
        let gw = Gateway::new(MockBackend::sequence([
            "is(a,left,b). is(b,left,c). query(a,c).",
        ]));
        let t = run_asp_pipeline(&stepgame(2), &cfg(), &gw);
        assert_eq!(t.answers, ["left"]);
        assert!(t.executable);
        assert_eq!(t.executable_at(), Some(0));
    }

    #[test]
    fn asp_repairs_parse_error() {
        let fixed = "is(a,left,b). is(b,left,c). query(a,c).";
        let gw = Gateway::new(MockBackend::sequence(["is(a left b).", fixed]));
        let t = run_asp_pipeline(&stepgame(2), &cfg(), &gw);
        let classes: Vec<ErrorClass> = t.iterations.iter().map(|r| r.error_class).collect();
        assert_eq!(classes, [ErrorClass::Parse, ErrorClass::None]);
        assert_eq!(t.answers, ["left"]);
        let msg = t.iterations[0].message.as_deref().unwrap();
        assert!(
            msg.starts_with("PARSE: ") && msg.ends_with("@ 1:6"),
            "{msg}"
        );
        // the refinement prompt was recorded and the error reached it verbatim
        assert_eq!(t.stages[1].stage, "refine-1");
    }

    #[test]
    fn asp_refine_prompt_quotes_error() {
        let seen = std::sync::Arc::new(std::sync::Mutex::new(Vec::new()));
        let log = seen.clone();
        let gw = Gateway::new(MockBackend::from_fn(move |req, prompt| {
            log.lock().unwrap().push(prompt.to_string());
            Some(match req.template_id {
                TemplateId::RefineWithError => "is(a,left,b). query(a,b).".into(),
                _ => "is(a left b).".into(),
            })
        }));
        let t = run_asp_pipeline(&stepgame(1), &cfg(), &gw);
        let msg = t.iterations[0].message.clone().unwrap();
        assert!(seen.lock().unwrap()[1].contains(&msg));
    }

    #[test]
    fn asp_no_result_exhausts() {
        let bad = "is(a,besides,b). query(a,b).";
        let gw = Gateway::new(MockBackend::sequence([bad, bad, bad]));
        let t = run_asp_pipeline(&stepgame(1), &cfg(), &gw);
        assert_eq!(t.iterations.len(), 3);
        assert!(t
            .iterations
            .iter()
            .all(|r| r.error_class == ErrorClass::NoResult));
        assert_eq!(t.answers, [UNKNOWN_LABEL]);
        assert!(!t.executable);
        assert_eq!(t.gateway_calls, 3);
    }

    #[test]
    fn asp_yes_no_and_blocks() {
        let prog = "block(a). block(b). object(x,big,red,circle,a). object(y,small,green,square,b). is(a,above,b). query :- is(x,above,y).";
        let gw = Gateway::new(MockBackend::sequence([prog]));
        let t = run_asp_pipeline(&sparqa(QuestionType::YN, "yes"), &cfg(), &gw);
        assert_eq!(t.answers, ["yes"]);

        let prog = "block(a). block(b). object(x,big,red,circle,a). query :- is(x,below,x).";
        let gw = Gateway::new(MockBackend::sequence([prog]));
        let t = run_asp_pipeline(&sparqa(QuestionType::YN, "no"), &cfg(), &gw);
        assert_eq!(t.answers, ["no"]);
        assert_eq!(t.final_class, ErrorClass::None);

        let prog = "block(a). block(b). object(o1,small,black,circle,a). query(Block) :- block(Block), not object(_,_,black,_,OtherBlock) : block(OtherBlock), OtherBlock != Block.";
        let gw = Gateway::new(MockBackend::sequence([prog]));
        let t = run_asp_pipeline(&sparqa(QuestionType::FB, "a"), &cfg(), &gw);
        assert_eq!(t.answers, ["a"]);
    }

    #[test]
    fn call_budget() {
        let gw = Gateway::new(MockBackend::from_fn(|_, _| Some("is(a left b).".into())));
        for max in 1..=4 {
            let c = PipelineConfig {
                max_iterations: max,
                ..cfg()
            };
            let t = run_asp_pipeline(&stepgame(1), &c, &gw);
            assert_eq!(t.iterations.len(), max);
            assert!(t.gateway_calls <= 1 + 2 * max);
        }
    }

    #[test]
    fn batch_is_ordered() {
        let gw = Gateway::new(MockBackend::from_fn(|_, _| Some("left".into())));
        let mut exs: Vec<Example> = (0..20)
            .map(|i| Example {
                id: format!("e{i:02}"),
                ..stepgame(1)
            })
            .collect();
        exs.reverse();
        let traces = run_batch(Strategy::Direct, &exs, &cfg(), &gw, 4);
        let ids: Vec<&str> = traces.iter().map(|t| t.example_id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }
}
