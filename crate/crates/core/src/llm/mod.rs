//! Chat-completion gateway: prompt templates, live/replay/mock backends and
//! transcript recording.

mod backend;
mod template;
mod transcript;

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

pub use backend::{
    Backend, Completion, LiveBackend, MockBackend, ReplayBackend, RetryPolicy, API_KEY_ENV,
    BASE_URL_ENV, DEFAULT_BASE_URL,
};
pub use template::{
    fewshot, render_prompt, PromptRequest, TemplateId, RULES_SPARQA, RULES_STEPGAME,
};
pub use transcript::{fingerprint, Recorder, Transcript, TranscriptEntry};

/// Failures of the gateway itself, kept apart from solver failures.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GatewayError {
    #[error("GATEWAY: template variable '{0}' is not bound")]
    MissingVariable(String),
    #[error("GATEWAY: unknown template '{0}'")]
    UnknownTemplate(String),
    #[error("GATEWAY: credential environment variable {0} is not set")]
    MissingCredential(String),
    #[error("GATEWAY: HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("GATEWAY: transport error: {0}")]
    Transport(String),
    #[error("GATEWAY: giving up after {attempts} attempts: {last}")]
    RetriesExhausted {
        attempts: u32,
        last: Box<GatewayError>,
    },
    #[error("GATEWAY: no recorded response for fingerprint {0}")]
    FingerprintMiss(String),
    #[error("GATEWAY: mock script exhausted at call {0}")]
    ScriptExhausted(usize),
    #[error("GATEWAY: malformed response: {0}")]
    Decode(String),
    #[error("GATEWAY: {0}")]
    Io(String),
}

/// One completed exchange as seen by callers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exchange {
    pub fingerprint: String,
    pub prompt: String,
    pub response: String,
    pub latency_ms: u64,
}

/// Renders requests, forwards them to a backend and optionally records them.
#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn Backend>,
    recorder: Option<Arc<Recorder>>,
}

impl Gateway {
    pub fn new(backend: impl Backend + 'static) -> Self {
        Gateway {
            backend: Arc::new(backend),
            recorder: None,
        }
    }

    pub fn from_arc(backend: Arc<dyn Backend>) -> Self {
        Gateway {
            backend,
            recorder: None,
        }
    }

    pub fn with_recorder(mut self, recorder: Arc<Recorder>) -> Self {
        self.recorder = Some(recorder);
        self
    }

    pub fn backend_name(&self) -> &'static str {
        self.backend.name()
    }

    pub fn complete(&self, req: &PromptRequest) -> Result<Exchange, GatewayError> {
        let prompt = render_prompt(req)?;
        let fp = fingerprint(&req.model_id, &prompt);
        let c = self.backend.complete(req, &prompt)?;
        if let Some(rec) = &self.recorder {
            rec.record(TranscriptEntry {
                fingerprint: fp.clone(),
                model_id: req.model_id.clone(),
                template: req.template_id.as_str().to_string(),
                prompt: prompt.clone(),
                response: c.text.clone(),
                latency_ms: c.latency_ms,
                timestamp: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_millis() as u64)
                    .unwrap_or(0),
            })?;
        }
        Ok(Exchange {
            fingerprint: fp,
            prompt,
            response: c.text,
            latency_ms: c.latency_ms,
        })
    }
}
