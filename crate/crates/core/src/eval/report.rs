use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::load::EvalError;
use super::score::{score, MatchKind};
use super::Example;
use crate::pipeline::{ErrorClass, PipelineTrace, Strategy};
use crate::spatial::{QuestionType, UNKNOWN_LABEL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellAccuracy {
    pub cell: String,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl CellAccuracy {
    fn new(cell: String, n: usize, correct: usize) -> Self {
        let accuracy = if n == 0 {
            0.0
        } else {
            correct as f64 / n as f64
        };
        CellAccuracy {
            cell,
            n,
            correct,
            accuracy,
        }
    }
}

/// Results of one model and strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub model_id: String,
    pub strategy: Strategy,
    pub cells: Vec<CellAccuracy>,
    /// Sample-weighted over all cells.
    pub overall: CellAccuracy,
    /// Share of examples with an answer-producing program by round `r`
    /// (cumulative). Empty for strategies without a solver.
    pub executability: Vec<f64>,
    /// Iterations that did not produce an answer, by class.
    pub error_counts: BTreeMap<ErrorClass, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagReason {
    /// The solver produced an answer that differs from the gold label.
    SolverDisagreesWithGold,
    /// The solver derived several answers to a single-answer question.
    MultipleAnswers,
}

/// Example whose gold label may be wrong.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub example_id: String,
    pub model_id: String,
    pub reason: FlagReason,
    pub answers: Vec<String>,
    pub gold: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredExample {
    pub example_id: String,
    pub model_id: String,
    pub strategy: Strategy,
    pub kind: MatchKind,
    pub score: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub flags: Vec<Flag>,
    pub scores: Vec<ScoredExample>,
}

fn cell_key(ex: &Example) -> (u8, usize) {
    let q = ex.qtype.map_or(0, |q| {
        QuestionType::ALL.iter().position(|x| *x == q).unwrap() + 1
    });
    (ex.hop.unwrap_or(0), q)
}

/// Aggregates traces into accuracy, executability and error tables.
///
/// Every (model, strategy) group must contain exactly one trace per example.
pub fn build_report(
    traces: &[PipelineTrace],
    examples: &[Example],
) -> Result<EvalReport, EvalError> {
    let by_id: HashMap<&str, &Example> = examples.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut groups: BTreeMap<(String, &'static str), Vec<&PipelineTrace>> = BTreeMap::new();
    for t in traces {
        if !by_id.contains_key(t.example_id.as_str()) {
            return Err(EvalError::Mismatch(format!(
                "trace for unknown example '{}'",
                t.example_id
            )));
        }
        groups
            .entry((t.model_id.clone(), t.strategy.as_str()))
            .or_default()
            .push(t);
    }

    let mut rows = Vec::new();
    let mut flags = Vec::new();
    let mut scores = Vec::new();
    for ((model_id, _), group) in groups {
        let ids: BTreeSet<&str> = group.iter().map(|t| t.example_id.as_str()).collect();
        if ids.len() != group.len() || ids.len() != examples.len() {
            return Err(EvalError::Mismatch(format!(
                "model '{model_id}' strategy '{}': {} traces for {} examples",
                group[0].strategy,
                group.len(),
                examples.len()
            )));
        }
        let strategy = group[0].strategy;
        let mut cells: BTreeMap<(u8, usize), (String, usize, usize)> = BTreeMap::new();
        let mut error_counts: BTreeMap<ErrorClass, usize> = BTreeMap::new();
        for t in &group {
            let ex = by_id[t.example_id.as_str()];
            let predicted: BTreeSet<String> = t.answers.iter().cloned().collect();
            let m = score(&predicted, &ex.gold, ex.qtype);
            let c = cells.entry(cell_key(ex)).or_insert((ex.cell(), 0, 0));
            c.1 += 1;
            c.2 += usize::from(m.score);
            scores.push(ScoredExample {
                example_id: ex.id.clone(),
                model_id: model_id.clone(),
                strategy,
                kind: m.kind,
                score: m.score,
            });
            for r in &t.iterations {
                if r.error_class != ErrorClass::None {
                    *error_counts.entry(r.error_class).or_default() += 1;
                }
            }
            if t.executable {
                let single = !ex.qtype.is_some_and(QuestionType::allows_multiple);
                let reason = if single && t.answers.len() > 1 {
                    Some(FlagReason::MultipleAnswers)
                } else if m.score == 0 && !t.answers.iter().any(|a| a == UNKNOWN_LABEL) {
                    Some(FlagReason::SolverDisagreesWithGold)
                } else {
                    None
                };
                if let Some(reason) = reason {
                    flags.push(Flag {
                        example_id: ex.id.clone(),
                        model_id: model_id.clone(),
                        reason,
                        answers: t.answers.clone(),
                        gold: ex.gold.iter().cloned().collect(),
                    });
                }
            }
        }
        let cells: Vec<CellAccuracy> = cells
            .into_values()
            .map(|(cell, n, correct)| CellAccuracy::new(cell, n, correct))
            .collect();
        let overall = CellAccuracy::new(
            "overall".into(),
            cells.iter().map(|c| c.n).sum(),
            cells.iter().map(|c| c.correct).sum(),
        );
        let executability = if strategy == Strategy::Asp {
            executability_curve(&group)
        } else {
            Vec::new()
        };
        rows.push(ReportRow {
            model_id,
            strategy,
            cells,
            overall,
            executability,
            error_counts,
        });
    }
    Ok(EvalReport {
        rows,
        flags,
        scores,
    })
}

fn executability_curve(group: &[&PipelineTrace]) -> Vec<f64> {
    let rounds = group
        .iter()
        .map(|t| t.iterations.len())
        .max()
        .unwrap_or(0)
        .max(1);
    let total = group.len() as f64;
    (0..rounds)
        .map(|r| {
            let ok = group
                .iter()
                .filter(|t| t.executable_at().is_some_and(|i| i <= r))
                .count();
            ok as f64 / total
        })
        .collect()
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> EvalError + '_ {
    move |e| EvalError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// Writes traces, one JSON object per line.
pub fn write_traces(path: &Path, traces: &[PipelineTrace]) -> Result<(), EvalError> {
    let mut out = String::new();
    for t in traces {
        out.push_str(&serde_json::to_string(t).expect("trace serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn read_traces(path: &Path) -> Result<Vec<PipelineTrace>, EvalError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| EvalError::Schema {
                path: path.to_path_buf(),
                record: format!("line {}", i + 1),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Writes `accuracy.csv`, `executability.csv`, `executability.dat`,
/// `errors.csv`, `scores.csv` and `flags.ndjson` into `dir`.
pub fn write_report(dir: &Path, report: &EvalReport) -> Result<(), EvalError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let path = dir.join("accuracy.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["model", "strategy", "cell", "n", "correct", "accuracy"])
        .map_err(csv_err(&path))?;
    for row in &report.rows {
        for c in row.cells.iter().chain(std::iter::once(&row.overall)) {
            w.write_record([
                row.model_id.as_str(),
                row.strategy.as_str(),
                &c.cell,
                &c.n.to_string(),
                &c.correct.to_string(),
                &format!("{:.4}", c.accuracy),
            ])
            .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join("executability.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["model", "strategy", "round", "rate"])
        .map_err(csv_err(&path))?;
    let mut dat = String::from("# round rate\n");
    for row in report.rows.iter().filter(|r| !r.executability.is_empty()) {
        dat.push_str(&format!("# {} {}\n", row.model_id, row.strategy));
        for (r, rate) in row.executability.iter().enumerate() {
            w.write_record([
                row.model_id.as_str(),
                row.strategy.as_str(),
                &r.to_string(),
                &format!("{rate:.4}"),
            ])
            .map_err(csv_err(&path))?;
            dat.push_str(&format!("{r} {rate:.4}\n"));
        }
        dat.push_str("\n\n");
    }
    w.flush().map_err(io_err(&path))?;
    let path = dir.join("executability.dat");
    fs::write(&path, dat).map_err(io_err(&path))?;

    let path = dir.join("errors.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["model", "strategy", "class", "count"])
        .map_err(csv_err(&path))?;
    for row in &report.rows {
        for (class, n) in &row.error_counts {
            w.write_record([
                row.model_id.as_str(),
                row.strategy.as_str(),
                class.as_str(),
                &n.to_string(),
            ])
            .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join("scores.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["example", "model", "strategy", "kind", "score"])
        .map_err(csv_err(&path))?;
    for s in &report.scores {
        let kind = match s.kind {
            MatchKind::Exact => "exact",
            MatchKind::Partial => "partial",
            MatchKind::Miss => "miss",
        };
        w.write_record([
            s.example_id.as_str(),
            &s.model_id,
            s.strategy.as_str(),
            kind,
            &s.score.to_string(),
        ])
        .map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join("flags.ndjson");
    let mut f = fs::File::create(&path).map_err(io_err(&path))?;
    for flag in &report.flags {
        writeln!(
            f,
            "{}",
            serde_json::to_string(flag).expect("flag serializes")
        )
        .map_err(io_err(&path))?;
    }
    Ok(())
}
