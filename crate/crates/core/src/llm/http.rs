use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{BackendError, ChatBackend};
use crate::rng::Rng;

/// System message sent with every request.
pub const OPERATOR_ROLE: &str = "You act as the crossover and mutation operator of a multi-objective \
evolutionary algorithm. Read the examples, propose better points, and reply only with the requested \
lines of numbers.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmConfig {
    /// Full URL of a chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    /// Attempts per offspring request in the operator, and retries of
    /// transient HTTP failures inside the backend.
    pub max_retries: usize,
    pub timeout_secs: f64,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    /// First backoff delay; doubles on every retry.
    pub backoff_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-3.5-turbo".into(),
            temperature: 1.0,
            max_retries: 3,
            timeout_secs: 30.0,
            api_key_env: "LLM_API_KEY".into(),
            backoff_ms: 1000,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(format!("timeout_secs must be positive, got {}", self.timeout_secs));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if self.endpoint.is_empty() || self.model.is_empty() {
            return Err("endpoint and model must be non-empty".into());
        }
        Ok(())
    }

    /// Reads the API key, failing with a configuration error when unset or empty.
    pub fn api_key(&self) -> Result<String, BackendError> {
        match std::env::var(&self.api_key_env) {
            Ok(k) if !k.trim().is_empty() => Ok(k),
            _ => Err(BackendError::Config(format!(
                "environment variable {} with the API key is not set",
                self.api_key_env
            ))),
        }
    }
}

/// Blocking client for an OpenAI-compatible chat-completions endpoint.
pub struct HttpBackend {
    cfg: LlmConfig,
    api_key: String,
    client: reqwest::blocking::Client,
    pub calls: usize,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.cfg.endpoint)
            .field("model", &self.cfg.model)
            .field("calls", &self.calls)
            .finish_non_exhaustive()
    }
}

impl HttpBackend {
    pub fn new(cfg: LlmConfig) -> Result<Self, BackendError> {
        cfg.validate().map_err(BackendError::Config)?;
        let api_key = cfg.api_key()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(Self {
            cfg,
            api_key,
            client,
            calls: 0,
        })
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        json!({
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "messages": [
                {"role": "system", "content": OPERATOR_ROLE},
                {"role": "user", "content": prompt},
            ],
        })
    }

    fn send_once(&mut self, body: &Value) -> Result<String, BackendError> {
        self.calls += 1;
        let resp = self
            .client
            .post(&self.cfg.endpoint)
            .bearer_auth(&self.api_key)
            .json(body)
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 429 {
            return Err(BackendError::RateLimited);
        }
        if status.is_server_error() {
            return Err(BackendError::Transport(format!("server returned {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(BackendError::Status(status.as_u16(), text));
        }
        let value: Value = resp.json().map_err(|e| BackendError::InvalidResponse(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| BackendError::InvalidResponse("missing choices[0].message.content".into()))
    }
}

impl ChatBackend for HttpBackend {
    /// One chat completion, retrying transport errors, 5xx and 429 with
    /// exponential backoff (`backoff_ms`, doubled each time) up to `max_retries` times.
    fn complete(&mut self, prompt: &str, _rng: &mut Rng) -> Result<String, BackendError> {
        let body = self.request_body(prompt);
        let mut attempt = 0;
        loop {
            match self.send_once(&body) {
                Err(e) if e.is_retryable() && attempt < self.cfg.max_retries => {
                    let delay = Duration::from_millis(self.cfg.backoff_ms.saturating_mul(1 << attempt.min(16)));
                    log::debug!("chat request failed ({e}), retrying in {delay:?}");
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                Err(BackendError::RateLimited) => {
                    return Err(BackendError::Transport("rate limited after all retries".into()))
                }
                other => return other,
            }
        }
    }
}
