use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;
use thiserror::Error;

use super::Example;
use crate::pipeline::gold_label;
use crate::spatial::{Dataset, QuestionType, StepGameRelation};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: record {record}: {message}")]
    Schema {
        path: PathBuf,
        record: String,
        message: String,
    },
    #[error("{0}")]
    Mismatch(String),
}

fn read_json(path: &Path) -> Result<Json, EvalError> {
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| EvalError::Schema {
        path: path.to_path_buf(),
        record: "<file>".into(),
        message: e.to_string(),
    })
}

/// Text of a `story` field given either as one string or a list of sentences.
fn story_text(v: &Json) -> Option<String> {
    match v {
        Json::String(s) => Some(s.trim().to_string()),
        Json::Array(parts) => {
            let parts: Option<Vec<&str>> =
                parts.iter().map(|p| p.as_str().map(str::trim)).collect();
            Some(parts?.join(" "))
        }
        _ => None,
    }
}

/// Files for hop `k`: `qa{k}_*.json`, preferring a test split when several exist.
fn hop_file(dir: &Path, k: u8) -> Result<PathBuf, EvalError> {
    let io = |source| EvalError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let prefix = format!("qa{k}_");
    let mut found: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(&prefix) && n.ends_with(".json"))
        })
        .collect();
    found.sort();
    if let Some(test) = found.iter().find(|p| p.to_string_lossy().contains("test")) {
        return Ok(test.clone());
    }
    found.into_iter().next().ok_or_else(|| {
        io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no {prefix}*.json file"),
        ))
    })
}

fn sorted_keys(obj: &serde_json::Map<String, Json>) -> Vec<&String> {
    let mut keys: Vec<&String> = obj.keys().collect();
    keys.sort_by_key(|k| (k.parse::<u64>().unwrap_or(u64::MAX), k.to_string()));
    keys
}

/// Seeded choice of `n` out of `len` positions, returned in ascending order.
fn pick(len: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, len, n.min(len)).into_vec();
    idx.sort_unstable();
    idx
}

/// Loads `per_hop` seeded samples for every hop in `hops` from a directory of
/// per-hop StepGame files (`qa{k}_*.json`, each an object of
/// `id -> {story, question, label}`).
pub fn load_stepgame(
    dir: &Path,
    hops: &BTreeSet<u8>,
    per_hop: usize,
    seed: u64,
) -> Result<Vec<Example>, EvalError> {
    let mut out = Vec::new();
    for &k in hops {
        let path = hop_file(dir, k)?;
        let json = read_json(&path)?;
        let schema = |record: &str, message: &str| EvalError::Schema {
            path: path.clone(),
            record: record.to_string(),
            message: message.to_string(),
        };
        let obj = json
            .as_object()
            .ok_or_else(|| schema("<file>", "expected an object of records"))?;
        let keys = sorted_keys(obj);
        if keys.len() < per_hop {
            warn!(
                "{}: only {} records for hop {k}",
                path.display(),
                keys.len()
            );
        }
        for i in pick(keys.len(), per_hop, seed.wrapping_add(u64::from(k))) {
            let key = keys[i];
            let rec = &obj[key];
            let context = rec
                .get("story")
                .and_then(story_text)
                .ok_or_else(|| schema(key, "missing or malformed 'story'"))?;
            let question = rec
                .get("question")
                .and_then(Json::as_str)
                .ok_or_else(|| schema(key, "missing 'question'"))?;
            let raw = rec
                .get("label")
                .and_then(Json::as_str)
                .ok_or_else(|| schema(key, "missing 'label'"))?;
            let label = gold_label(raw, Dataset::StepGame, None);
            if StepGameRelation::from_label(&label).is_none() {
                return Err(schema(
                    key,
                    &format!("label '{raw}' is not a StepGame relation"),
                ));
            }
            let id = match key.parse::<u64>() {
                Ok(n) => format!("k{k:02}-{n:06}"),
                Err(_) => format!("k{k:02}-{key}"),
            };
            out.push(Example {
                id,
                dataset: Dataset::StepGame,
                context,
                question: question.trim().to_string(),
                choices: None,
                gold: BTreeSet::from([label]),
                hop: Some(k),
                qtype: None,
            });
        }
    }
    Ok(out)
}

/// Loads a seeded stratified sample of `per_type` questions per question type
/// from a SpartQA-style file (`{"data": [{story, questions: [...]}]}`).
pub fn load_sparqa(path: &Path, per_type: usize, seed: u64) -> Result<Vec<Example>, EvalError> {
    let json = read_json(path)?;
    let schema = |record: &str, message: &str| EvalError::Schema {
        path: path.to_path_buf(),
        record: record.to_string(),
        message: message.to_string(),
    };
    let data = json
        .get("data")
        .and_then(Json::as_array)
        .ok_or_else(|| schema("<file>", "missing 'data' array"))?;
    let mut pools: BTreeMap<QuestionType, Vec<Example>> = BTreeMap::new();
    for (si, scene) in data.iter().enumerate() {
        let scene_id = scene
            .get("identifier")
            .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
            .unwrap_or_else(|| si.to_string());
        let context = scene
            .get("story")
            .and_then(story_text)
            .ok_or_else(|| schema(&scene_id, "missing or malformed 'story'"))?;
        let questions = scene
            .get("questions")
            .and_then(Json::as_array)
            .ok_or_else(|| schema(&scene_id, "missing 'questions'"))?;
        for (qi, q) in questions.iter().enumerate() {
            let q_id = q
                .get("q_id")
                .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
                .unwrap_or_else(|| qi.to_string());
            let record = format!("{scene_id}/{q_id}");
            let qtype: QuestionType = q
                .get("q_type")
                .and_then(Json::as_str)
                .ok_or_else(|| schema(&record, "missing 'q_type'"))?
                .parse()
                .map_err(|e: String| schema(&record, &e))?;
            let question = q
                .get("question")
                .and_then(Json::as_str)
                .ok_or_else(|| schema(&record, "missing 'question'"))?;
            let answers: Vec<String> = match q.get("answer") {
                Some(Json::String(s)) => vec![s.clone()],
                Some(Json::Array(a)) => a
                    .iter()
                    .map(|v| {
                        v.as_str()
                            .map(str::to_string)
                            .unwrap_or_else(|| v.to_string())
                    })
                    .collect(),
                _ => return Err(schema(&record, "missing 'answer'")),
            };
            let gold: BTreeSet<String> = answers
                .iter()
                .map(|a| gold_label(a, Dataset::SparQA, Some(qtype)))
                .filter(|a| !a.is_empty())
                .collect();
            if gold.is_empty() {
                return Err(schema(&record, "empty answer"));
            }
            let choices = q
                .get("candidate_answers")
                .and_then(Json::as_array)
                .map(|c| {
                    c.iter()
                        .map(|v| {
                            v.as_str()
                                .map(str::to_string)
                                .unwrap_or_else(|| v.to_string())
                        })
                        .collect()
                });
            pools.entry(qtype).or_default().push(Example {
                id: format!("{}-{record}", qtype.as_str()),
                dataset: Dataset::SparQA,
                context: context.clone(),
                question: question.trim().to_string(),
                choices,
                gold,
                hop: None,
                qtype: Some(qtype),
            });
        }
    }
    let mut out = Vec::new();
    for q in QuestionType::ALL {
        let pool = pools.remove(&q).unwrap_or_default();
        if pool.len() < per_type {
            warn!("{}: only {} {q} questions", path.display(), pool.len());
        }
        let salt = q as u64;
        for i in pick(pool.len(), per_type, seed.wrapping_add(salt)) {
            out.push(pool[i].clone());
        }
    }
    Ok(out)
}
