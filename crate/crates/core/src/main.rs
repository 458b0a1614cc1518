use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use spatial_asp::asp::{
    check_safety, ground, parse_program, run_program, stratify, GroundOptions, Program,
    SolverOutcome, DEFAULT_DOMAIN_BOUND, DEFAULT_GROUND_CEILING,
};
use spatial_asp::eval::{
    build_report, generate_story, load_sparqa, load_stepgame, read_traces, write_report,
    write_traces, Example, DEFAULT_SEED,
};
use spatial_asp::llm::{
    Backend, Gateway, LiveBackend, MockBackend, Recorder, ReplayBackend, Transcript, API_KEY_ENV,
    BASE_URL_ENV, DEFAULT_BASE_URL,
};
use spatial_asp::pipeline::{run_batch, PipelineConfig, Strategy};
use spatial_asp::spatial::{knowledge_program, Dataset, SynonymDictionary};

/// Exit status when a program has no stable model or fails to check.
const EXIT_PROGRAM: u8 = 1;
/// Exit status for configuration, I/O and gateway setup errors.
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(
    name = "spatial-asp",
    version,
    about = "Stratified ASP engine and LLM+ASP spatial QA pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a program and print its stable model, one atom per line.
    Solve(SolveArgs),
    /// Print the ground program.
    Ground(SolveArgs),
    /// Parse, safety-check and stratify a program without solving it.
    Check(SolveArgs),
    /// Run a strategy over a dataset and write traces and reports.
    Pipeline(PipelineArgs),
    /// Rebuild reports from a traces.ndjson file.
    Eval(EvalArgs),
    /// Run the pipeline against a live endpoint, recording every completion.
    Record(PipelineArgs),
    /// Run the pipeline from a recorded transcript, without network access.
    Replay(PipelineArgs),
    /// Write synthetic StepGame files in the published per-hop layout.
    GenStepgame(GenArgs),
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// Append a bundled knowledge program.
    #[arg(long, value_enum)]
    knowledge: Option<DatasetArg>,
    #[arg(long, default_value_t = DEFAULT_DOMAIN_BOUND)]
    domain_bound: i64,
    #[arg(long, default_value_t = DEFAULT_GROUND_CEILING)]
    ceiling: u64,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DatasetArg {
    Stepgame,
    Sparqa,
}

impl From<DatasetArg> for Dataset {
    fn from(d: DatasetArg) -> Self {
        match d {
            DatasetArg::Stepgame => Dataset::StepGame,
            DatasetArg::Sparqa => Dataset::SparQA,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BackendArg {
    Live,
    Replay,
    Mock,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(value_enum)]
    dataset: Option<DatasetArg>,
    /// StepGame directory of qa{k}_*.json files, or a SparQA JSON file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// TOML file with defaults for any of these flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// direct, facts-rules or asp.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Transcript to replay from, or to record into.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Mock script: TOML with [[rule]] entries of `contains` and `response`.
    #[arg(long)]
    mock: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    base_url: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    domain_bound: Option<i64>,
    /// Hop range for StepGame, e.g. 1-10 or 3.
    #[arg(long)]
    hops: Option<String>,
    #[arg(long)]
    per_hop: Option<usize>,
    #[arg(long)]
    per_type: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Replacement knowledge program.
    #[arg(long)]
    knowledge: Option<PathBuf>,
    /// Replacement synonym dictionary (tab-separated).
    #[arg(long)]
    synonyms: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dataset: Option<DatasetArg>,
    data: Option<PathBuf>,
    strategy: Option<String>,
    backend: Option<BackendArg>,
    transcript: Option<PathBuf>,
    mock: Option<PathBuf>,
    model: Option<String>,
    base_url: Option<String>,
    api_key_env: Option<String>,
    max_iterations: Option<usize>,
    domain_bound: Option<i64>,
    hops: Option<String>,
    per_hop: Option<usize>,
    per_type: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    knowledge: Option<PathBuf>,
    synonyms: Option<PathBuf>,
}

impl PipelineArgs {
    /// Fills unset flags from the config file.
    fn merge(mut self) -> Result<Self, String> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let f: FileConfig =
            toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        macro_rules! fill {
            ($($field:ident),*) => { $( if self.$field.is_none() { self.$field = f.$field; } )* };
        }
        fill!(
            dataset,
            data,
            strategy,
            backend,
            transcript,
            mock,
            model,
            base_url,
            api_key_env,
            max_iterations,
            domain_bound,
            hops,
            per_hop,
            per_type,
            seed,
            out,
            jobs,
            knowledge,
            synonyms
        );
        Ok(self)
    }
}

#[derive(Args)]
struct EvalArgs {
    traces: PathBuf,
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Stories per hop.
    #[arg(long, default_value_t = 100)]
    per_hop: usize,
    #[arg(long, default_value = "1-10")]
    hops: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Deserialize)]
struct MockScript {
    rule: Vec<MockRule>,
}

#[derive(Deserialize)]
struct MockRule {
    contains: String,
    response: String,
}

enum Failure {
    Program(String),
    Config(String),
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Config(s)
    }
}

impl From<&str> for Failure {
    fn from(s: &str) -> Self {
        Failure::Config(s.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Ground(a) => cmd_ground(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Pipeline(a) => a
            .merge()
            .map_err(Failure::Config)
            .and_then(|a| cmd_pipeline(a, None)),
        Command::Record(a) => a
            .merge()
            .map_err(Failure::Config)
            .and_then(|a| cmd_pipeline(a, Some(BackendArg::Live))),
        Command::Replay(a) => a
            .merge()
            .map_err(Failure::Config)
            .and_then(|a| cmd_pipeline(a, Some(BackendArg::Replay))),
        Command::Eval(a) => cmd_eval(&a),
        Command::GenStepgame(a) => cmd_gen(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Program(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_PROGRAM)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn load_program(a: &SolveArgs) -> Result<Program, Failure> {
    let text = fs::read_to_string(&a.file).map_err(|e| format!("{}: {e}", a.file.display()))?;
    let mut p = parse_program(&text).map_err(|e| Failure::Program(e.to_string()))?;
    if let Some(d) = a.knowledge {
        p.extend(knowledge_program(d.into()));
    }
    Ok(p)
}

fn options(a: &SolveArgs) -> GroundOptions {
    GroundOptions {
        domain_bound: a.domain_bound,
        ceiling: a.ceiling,
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Failure> {
    let p = load_program(a)?;
    match run_program(&p, &options(a)) {
        SolverOutcome::Model(m) => {
            print!("{m}");
            Ok(())
        }
        SolverOutcome::Failed(e) => Err(Failure::Program(e.to_string())),
    }
}

fn cmd_ground(a: &SolveArgs) -> Result<(), Failure> {
    let p = load_program(a)?;
    check_safety(&p).map_err(|e| Failure::Program(e.to_string()))?;
    let g = ground(&p, &options(a)).map_err(|e| Failure::Program(e.to_string()))?;
    for r in &g.rules {
        println!("{r}");
    }
    Ok(())
}

fn cmd_check(a: &SolveArgs) -> Result<(), Failure> {
    let p = load_program(a)?;
    check_safety(&p).map_err(|e| Failure::Program(e.to_string()))?;
    let g = ground(&p, &options(a)).map_err(|e| Failure::Program(e.to_string()))?;
    stratify(&g).map_err(|e| Failure::Program(e.to_string()))?;
    println!("ok");
    Ok(())
}

fn parse_hops(s: &str) -> Result<BTreeSet<u8>, String> {
    let bad = || format!("invalid hop range '{s}'");
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let k = s.trim().parse().map_err(|_| bad())?;
            (k, k)
        }
    };
    if lo < 1 || hi > 10 || lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn build_backend(a: &PipelineArgs, kind: BackendArg) -> Result<Arc<dyn Backend>, String> {
    Ok(match kind {
        BackendArg::Live => {
            let var = a
                .api_key_env
                .clone()
                .unwrap_or_else(|| API_KEY_ENV.to_string());
            let key = std::env::var(&var)
                .map_err(|_| format!("live backend needs the API key in ${var}"))?;
            let base = a
                .base_url
                .clone()
                .or_else(|| std::env::var(BASE_URL_ENV).ok())
                .unwrap_or_else(|| DEFAULT_BASE_URL.to_string());
            Arc::new(LiveBackend::new(base, key))
        }
        BackendArg::Replay => {
            let path = a
                .transcript
                .as_ref()
                .ok_or("replay backend needs --transcript")?;
            let t = Transcript::load(path).map_err(|e| e.to_string())?;
            Arc::new(ReplayBackend::new(t))
        }
        BackendArg::Mock => {
            let path = a.mock.as_ref().ok_or("mock backend needs --mock")?;
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let script: MockScript =
                toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            Arc::new(MockBackend::rules(
                script.rule.into_iter().map(|r| (r.contains, r.response)),
            ))
        }
    })
}

fn load_examples(a: &PipelineArgs, dataset: Dataset) -> Result<Vec<Example>, String> {
    let data = a.data.as_ref().ok_or("missing --data")?;
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let loaded = match dataset {
        Dataset::StepGame => {
            let hops = parse_hops(a.hops.as_deref().unwrap_or("1-10"))?;
            load_stepgame(data, &hops, a.per_hop.unwrap_or(300), seed)
        }
        Dataset::SparQA => load_sparqa(data, a.per_type.unwrap_or(55), seed),
    };
    loaded.map_err(|e| e.to_string())
}

fn cmd_pipeline(a: PipelineArgs, forced: Option<BackendArg>) -> Result<(), Failure> {
    let dataset: Dataset = a
        .dataset
        .ok_or("missing dataset (stepgame or sparqa)")?
        .into();
    let strategy: Strategy = a.strategy.as_deref().unwrap_or("asp").parse()?;
    let kind = forced.or(a.backend).ok_or("missing --backend")?;
    if forced.is_some() && a.backend.is_some_and(|b| Some(b) != forced) {
        return Err(Failure::Config(
            "--backend conflicts with the subcommand".into(),
        ));
    }
    let backend = build_backend(&a, kind)?;
    let mut gateway = Gateway::from_arc(backend);
    let recording = match (kind, &a.transcript) {
        (BackendArg::Live, Some(path)) | (BackendArg::Mock, Some(path)) => {
            let rec = Arc::new(Recorder::to_file(path).map_err(|e| e.to_string())?);
            gateway = gateway.with_recorder(rec.clone());
            Some(rec)
        }
        (BackendArg::Live, None) if forced.is_some() => {
            return Err(Failure::Config("record needs --transcript".into()))
        }
        _ => None,
    };

    let examples = load_examples(&a, dataset)?;
    let mut cfg = PipelineConfig {
        max_iterations: a.max_iterations.unwrap_or(3),
        domain_bound: a.domain_bound,
        model_id: a.model.clone().unwrap_or_else(|| "gpt-4o-mini".to_string()),
        ..PipelineConfig::default()
    };
    if cfg.max_iterations == 0 {
        return Err(Failure::Config(
            "--max-iterations must be at least 1".into(),
        ));
    }
    if let Some(p) = &a.knowledge {
        cfg.knowledge = Some(fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?);
    }
    if let Some(p) = &a.synonyms {
        cfg.synonyms = Some(SynonymDictionary::from_file(p).map_err(|e| e.to_string())?);
    }

    info!("running {strategy} on {} examples", examples.len());
    let traces = run_batch(strategy, &examples, &cfg, &gateway, a.jobs.unwrap_or(0));
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
    write_traces(&out.join("traces.ndjson"), &traces).map_err(|e| e.to_string())?;
    let report = build_report(&traces, &examples).map_err(|e| e.to_string())?;
    write_report(&out, &report).map_err(|e| e.to_string())?;
    for row in &report.rows {
        println!(
            "{} {} overall {:.1}% ({}/{})",
            row.model_id,
            row.strategy,
            100.0 * row.overall.accuracy,
            row.overall.correct,
            row.overall.n
        );
    }
    if let Some(rec) = recording {
        info!("recorded {} completions", rec.len());
    }
    Ok(())
}

/// Examples carry everything a report needs, so they can be rebuilt from traces.
fn examples_from_traces(traces: &[spatial_asp::pipeline::PipelineTrace]) -> Vec<Example> {
    let mut seen = BTreeSet::new();
    traces
        .iter()
        .filter(|t| seen.insert(t.example_id.clone()))
        .map(|t| Example {
            id: t.example_id.clone(),
            dataset: t.dataset,
            context: String::new(),
            question: String::new(),
            choices: None,
            gold: t.gold.iter().cloned().collect(),
            hop: t.hop,
            qtype: t.qtype,
        })
        .collect()
}

fn cmd_eval(a: &EvalArgs) -> Result<(), Failure> {
    let traces = read_traces(&a.traces).map_err(|e| e.to_string())?;
    let examples = examples_from_traces(&traces);
    let report = build_report(&traces, &examples).map_err(|e| e.to_string())?;
    write_report(&a.out, &report).map_err(|e| e.to_string())?;
    for row in &report.rows {
        println!(
            "{} {} overall {:.1}%",
            row.model_id,
            row.strategy,
            100.0 * row.overall.accuracy
        );
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let hops = parse_hops(&a.hops)?;
    fs::create_dir_all(&a.out).map_err(|e| format!("{}: {e}", a.out.display()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for k in hops {
        let mut obj = serde_json::Map::new();
        for i in 0..a.per_hop {
            let s = generate_story(k, &mut rng);
            let story: Vec<String> = s
                .context()
                .split_inclusive(". ")
                .map(|x| x.trim().to_string())
                .collect();
            obj.insert(
                i.to_string(),
                serde_json::json!({
                    "story": story,
                    "question": s.question(),
                    "label": s.answer.label(),
                    "facts": s.program(),
                    "k_hop": k,
                }),
            );
        }
        let path: &Path = &a.out.join(format!("qa{k}_test.json"));
        let text = serde_json::to_string_pretty(&serde_json::Value::Object(obj)).expect("json");
        fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}
