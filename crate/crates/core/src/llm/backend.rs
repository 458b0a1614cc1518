use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde_json::{json, Value as Json};

use super::template::PromptRequest;
use super::transcript::{fingerprint, Transcript};
use super::GatewayError;

/// Text returned by a backend plus the latency attributed to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub latency_ms: u64,
}

/// A chat-completion source. Implementations must be callable from many threads.
pub trait Backend: Send + Sync {
    fn complete(&self, req: &PromptRequest, prompt: &str) -> Result<Completion, GatewayError>;

    fn name(&self) -> &'static str;
}

/// Retry policy for transient failures.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

/// OpenAI-compatible `POST {base_url}/chat/completions` client.
pub struct LiveBackend {
    base_url: String,
    api_key: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const API_KEY_ENV: &str = "SPATIAL_ASP_API_KEY";
pub const BASE_URL_ENV: &str = "SPATIAL_ASP_BASE_URL";

impl LiveBackend {
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Self {
        LiveBackend {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: api_key.into(),
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(120))
                .build(),
            retry: RetryPolicy::default(),
        }
    }

    /// Reads the key from `key_var` and the base URL from [`BASE_URL_ENV`].
    pub fn from_env(key_var: &str) -> Result<Self, GatewayError> {
        let key = std::env::var(key_var)
            .map_err(|_| GatewayError::MissingCredential(key_var.to_string()))?;
        let base = std::env::var(BASE_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
        Ok(Self::new(base, key))
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn attempt(&self, body: &Json) -> Result<String, Attempt> {
        let url = format!("{}/chat/completions", self.base_url);
        let resp = self
            .agent
            .post(&url)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body.clone());
        match resp {
            Ok(r) => {
                let v: Json = r
                    .into_json()
                    .map_err(|e| Attempt::Fatal(GatewayError::Decode(e.to_string())))?;
                v.pointer("/choices/0/message/content")
                    .and_then(Json::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| {
                        Attempt::Fatal(GatewayError::Decode(
                            "response has no choices[0].message.content".into(),
                        ))
                    })
            }
            Err(ureq::Error::Status(code, r)) => {
                let body = r.into_string().unwrap_or_default();
                let err = GatewayError::Http { status: code, body };
                if code == 429 || code >= 500 {
                    Err(Attempt::Transient(err))
                } else {
                    Err(Attempt::Fatal(err))
                }
            }
            Err(ureq::Error::Transport(t)) => {
                Err(Attempt::Transient(GatewayError::Transport(t.to_string())))
            }
        }
    }
}

enum Attempt {
    Transient(GatewayError),
    Fatal(GatewayError),
}

impl Backend for LiveBackend {
    fn complete(&self, req: &PromptRequest, prompt: &str) -> Result<Completion, GatewayError> {
        let body = json!({
            "model": req.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        let start = Instant::now();
        let mut backoff = self.retry.initial_backoff;
        let mut tries = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => {
                    return Ok(Completion {
                        text,
                        latency_ms: start.elapsed().as_millis() as u64,
                    })
                }
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Transient(e)) if tries < self.retry.max_retries => {
                    warn!("transient gateway failure ({e}), retrying in {backoff:?}");
                    std::thread::sleep(backoff);
                    backoff *= 2;
                    tries += 1;
                }
                Err(Attempt::Transient(e)) => {
                    return Err(GatewayError::RetriesExhausted {
                        attempts: tries + 1,
                        last: Box::new(e),
                    })
                }
            }
        }
    }

    fn name(&self) -> &'static str {
        "live"
    }
}

/// Serves recorded responses by fingerprint; never touches the network.
pub struct ReplayBackend {
    transcript: Transcript,
}

impl ReplayBackend {
    pub fn new(transcript: Transcript) -> Self {
        ReplayBackend { transcript }
    }
}

impl Backend for ReplayBackend {
    fn complete(&self, req: &PromptRequest, prompt: &str) -> Result<Completion, GatewayError> {
        let fp = fingerprint(&req.model_id, prompt);
        match self.transcript.find(&fp) {
            Some(e) => {
                debug!("replay hit {fp}");
                Ok(Completion {
                    text: e.response.clone(),
                    latency_ms: e.latency_ms,
                })
            }
            None => Err(GatewayError::FingerprintMiss(fp)),
        }
    }

    fn name(&self) -> &'static str {
        "replay"
    }
}

type Responder = dyn Fn(&PromptRequest, &str) -> Option<String> + Send + Sync;

/// Scripted backend for tests and dry runs.
pub struct MockBackend {
    script: MockScript,
    calls: Mutex<usize>,
}

enum MockScript {
    Sequence(Mutex<VecDeque<String>>),
    Function(Box<Responder>),
}

impl MockBackend {
    /// Returns the responses in call order, then fails with script-exhausted.
    pub fn sequence<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        MockBackend {
            script: MockScript::Sequence(Mutex::new(
                responses.into_iter().map(Into::into).collect(),
            )),
            calls: Mutex::new(0),
        }
    }

    /// Answers each call from `f`; `None` counts as an exhausted script.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&PromptRequest, &str) -> Option<String> + Send + Sync + 'static,
    {
        MockBackend {
            script: MockScript::Function(Box::new(f)),
            calls: Mutex::new(0),
        }
    }

    /// First rule whose needle occurs in the rendered prompt wins.
    pub fn rules<I, N, R>(rules: I) -> Self
    where
        I: IntoIterator<Item = (N, R)>,
        N: Into<String>,
        R: Into<String>,
    {
        let rules: Vec<(String, String)> = rules
            .into_iter()
            .map(|(n, r)| (n.into(), r.into()))
            .collect();
        Self::from_fn(move |_, prompt| {
            rules
                .iter()
                .find(|(n, _)| prompt.contains(n.as_str()))
                .map(|(_, r)| r.clone())
        })
    }

    pub fn calls(&self) -> usize {
        *self.calls.lock().unwrap_or_else(|p| p.into_inner())
    }
}

impl Backend for MockBackend {
    fn complete(&self, req: &PromptRequest, prompt: &str) -> Result<Completion, GatewayError> {
        let call = {
            let mut c = self.calls.lock().unwrap_or_else(|p| p.into_inner());
            *c += 1;
            *c - 1
        };
        let text = match &self.script {
            MockScript::Sequence(q) => q.lock().unwrap_or_else(|p| p.into_inner()).pop_front(),
            MockScript::Function(f) => f(req, prompt),
        };
        text.map(|text| Completion {
            text,
            latency_ms: 0,
        })
        .ok_or(GatewayError::ScriptExhausted(call))
    }

    fn name(&self) -> &'static str {
        "mock"
    }
}
