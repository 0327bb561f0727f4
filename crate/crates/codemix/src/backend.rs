//! Pluggable external backends (LLM classifiers, translators, scorers).
//!
//! Every backend speaks the same minimal contract: request is a single JSON
//! object, response is a single JSON object. The concrete transports are an
//! HTTP JSON endpoint, a subprocess (request on stdin, response on stdout),
//! and an in-process stub for tests and dry runs. API keys come from
//! environment variables named in the config, never from config values.

use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend {name}: transport failure: {detail}")]
    Transport { name: String, detail: String },
    #[error("backend {name}: malformed response: {detail}")]
    MalformedResponse { name: String, detail: String },
    #[error("backend {name}: timed out after {timeout_ms} ms")]
    Timeout { name: String, timeout_ms: u64 },
    #[error("environment variable {var} for backend {name} is not set")]
    MissingApiKey { name: String, var: String },
}

/// Transport definition for one backend.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum BackendKind {
    /// POST the request object to `url` as JSON.
    Http { url: String },
    /// Spawn `argv`, write the request to stdin, read the response from stdout.
    Command { argv: Vec<String> },
    /// Deterministic built-in stub (dry runs); `behavior` selects the variant.
    Stub { behavior: String },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub name: String,
    pub transport: BackendKind,
    #[serde(default)]
    pub prompt_template: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Token-bucket rate limit; absent means unlimited.
    #[serde(default)]
    pub requests_per_sec: Option<f64>,
    /// Name of the environment variable holding the API key, if any.
    #[serde(default)]
    pub api_key_env: Option<String>,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_max_retries() -> u32 {
    2
}

/// A callable backend: one JSON object in, one JSON object out.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn call(&self, request: &Value) -> Result<Value, BackendError>;
}

/// Retries `backend.call` up to `max_retries` additional times on transport
/// or timeout errors. Malformed responses are not retried.
pub fn call_with_retries(
    backend: &dyn Backend,
    request: &Value,
    max_retries: u32,
) -> Result<Value, BackendError> {
    let mut last_err = None;
    for _ in 0..=max_retries {
        match backend.call(request) {
            Ok(v) => return Ok(v),
            Err(e @ BackendError::MalformedResponse { .. }) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Simple token bucket. `None` capacity means unlimited.
pub struct RateLimiter {
    state: Option<Mutex<BucketState>>,
}

struct BucketState {
    tokens: f64,
    rate: f64,
    last_refill: Instant,
}

impl RateLimiter {
    pub fn new(requests_per_sec: Option<f64>) -> Self {
        let state = requests_per_sec.filter(|r| *r > 0.0).map(|rate| {
            Mutex::new(BucketState {
                tokens: rate.max(1.0),
                rate,
                last_refill: Instant::now(),
            })
        });
        RateLimiter { state }
    }

    /// Blocks until a request slot is available.
    pub fn acquire(&self) {
        let Some(state) = &self.state else { return };
        loop {
            let wait = {
                let mut s = state.lock().unwrap();
                let now = Instant::now();
                let elapsed = now.duration_since(s.last_refill).as_secs_f64();
                s.tokens = (s.tokens + elapsed * s.rate).min(s.rate.max(1.0));
                s.last_refill = now;
                if s.tokens >= 1.0 {
                    s.tokens -= 1.0;
                    None
                } else {
                    Some(Duration::from_secs_f64((1.0 - s.tokens) / s.rate))
                }
            };
            match wait {
                None => return,
                Some(d) => std::thread::sleep(d),
            }
        }
    }
}

pub struct HttpBackend {
    name: String,
    url: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
    limiter: RateLimiter,
}

impl HttpBackend {
    pub fn new(config: &BackendConfig, url: &str) -> Result<Self, BackendError> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| BackendError::MissingApiKey {
                name: config.name.clone(),
                var: var.clone(),
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| BackendError::Transport {
                name: config.name.clone(),
                detail: e.to_string(),
            })?;
        Ok(HttpBackend {
            name: config.name.clone(),
            url: url.to_string(),
            api_key,
            client,
            limiter: RateLimiter::new(config.requests_per_sec),
        })
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn call(&self, request: &Value) -> Result<Value, BackendError> {
        self.limiter.acquire();
        let mut req = self.client.post(&self.url).json(request);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout {
                    name: self.name.clone(),
                    timeout_ms: 0,
                }
            } else {
                BackendError::Transport {
                    name: self.name.clone(),
                    detail: e.to_string(),
                }
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(BackendError::Transport {
                name: self.name.clone(),
                detail: format!("http status {status}"),
            });
        }
        resp.json().map_err(|e| BackendError::MalformedResponse {
            name: self.name.clone(),
            detail: e.to_string(),
        })
    }
}

pub struct CommandBackend {
    name: String,
    argv: Vec<String>,
    limiter: RateLimiter,
}

impl CommandBackend {
    pub fn new(config: &BackendConfig, argv: &[String]) -> Self {
        CommandBackend {
            name: config.name.clone(),
            argv: argv.to_vec(),
            limiter: RateLimiter::new(config.requests_per_sec),
        }
    }
}

impl Backend for CommandBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn call(&self, request: &Value) -> Result<Value, BackendError> {
        self.limiter.acquire();
        let (program, args) = self.argv.split_first().ok_or(BackendError::Transport {
            name: self.name.clone(),
            detail: "empty argv".into(),
        })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| BackendError::Transport {
                name: self.name.clone(),
                detail: e.to_string(),
            })?;
        let payload = serde_json::to_vec(request).expect("request serializes");
        child
            .stdin
            .take()
            .expect("piped stdin")
            .write_all(&payload)
            .map_err(|e| BackendError::Transport {
                name: self.name.clone(),
                detail: e.to_string(),
            })?;
        let out = child
            .wait_with_output()
            .map_err(|e| BackendError::Transport {
                name: self.name.clone(),
                detail: e.to_string(),
            })?;
        if !out.status.success() {
            return Err(BackendError::Transport {
                name: self.name.clone(),
                detail: format!("exit status {}", out.status),
            });
        }
        serde_json::from_slice(&out.stdout).map_err(|e| BackendError::MalformedResponse {
            name: self.name.clone(),
            detail: e.to_string(),
        })
    }
}

type StubHandler = Box<dyn Fn(&Value) -> Result<Value, BackendError> + Send + Sync>;

/// In-process stub backed by a closure. Used for tests and `--dry-run`.
pub struct StubBackend {
    name: String,
    handler: StubHandler,
}

impl StubBackend {
    pub fn new<F>(name: &str, handler: F) -> Self
    where
        F: Fn(&Value) -> Result<Value, BackendError> + Send + Sync + 'static,
    {
        StubBackend {
            name: name.to_string(),
            handler: Box::new(handler),
        }
    }

    /// Stub that always answers with the same object.
    pub fn constant(name: &str, response: Value) -> Self {
        StubBackend::new(name, move |_| Ok(response.clone()))
    }
}

impl Backend for StubBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn call(&self, request: &Value) -> Result<Value, BackendError> {
        (self.handler)(request)
    }
}

/// Instantiate a backend from its config.
pub fn build_backend(config: &BackendConfig) -> Result<Box<dyn Backend>, BackendError> {
    match &config.transport {
        BackendKind::Http { url } => Ok(Box::new(HttpBackend::new(config, url)?)),
        BackendKind::Command { argv } => Ok(Box::new(CommandBackend::new(config, argv))),
        BackendKind::Stub { behavior } => Ok(build_stub(&config.name, behavior)),
    }
}

/// Built-in stub behaviors used by `--dry-run`:
/// `echo` returns the request back, `code_mixed`/`monolingual` are fixed LID
/// votes, `score:<x>` is a fixed scorer, `translate` emits a marked copy of
/// the input text.
pub fn build_stub(name: &str, behavior: &str) -> Box<dyn Backend> {
    let b = behavior.to_string();
    Box::new(StubBackend::new(name, move |req| {
        if b == "echo" {
            return Ok(req.clone());
        }
        if b == "code_mixed" || b == "monolingual" {
            return Ok(serde_json::json!({ "label": b }));
        }
        if let Some(score) = b.strip_prefix("score:") {
            let s: f64 = score.parse().unwrap_or(0.0);
            return Ok(serde_json::json!({ "score": s }));
        }
        if b == "translate" {
            let text = req.get("text").and_then(Value::as_str).unwrap_or("");
            return Ok(serde_json::json!({ "translation": format!("[stub] {text}") }));
        }
        Ok(serde_json::json!({}))
    }))
}
