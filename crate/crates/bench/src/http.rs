//! Blocking HTTP implementation of the text-completion contract.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use multipath_core::client::{
    ClientError, Completion, CompletionRequest, Sleeper, TextClient, TokenUsage,
};
use serde_json::{json, Value};

use crate::config::{ClientConfig, ConfigError};

pub const CORRELATION_HEADER: &str = "x-correlation-id";

/// Counting semaphore bounding concurrent requests.
pub struct InFlight {
    limit: usize,
    busy: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a>(&'a InFlight);

impl InFlight {
    pub fn new(limit: usize) -> Self {
        Self {
            limit: limit.max(1),
            busy: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut busy = self.busy.lock().expect("limiter lock");
        while *busy >= self.limit {
            busy = self.freed.wait(busy).expect("limiter lock");
        }
        *busy += 1;
        Permit(self)
    }

    pub fn in_use(&self) -> usize {
        *self.busy.lock().expect("limiter lock")
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.busy.lock().expect("limiter lock") -= 1;
        self.0.freed.notify_one();
    }
}

pub struct ThreadSleeper;

impl Sleeper for ThreadSleeper {
    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

pub struct HttpClient {
    agent: ureq::Agent,
    config: ClientConfig,
    credential: Option<String>,
    gate: InFlight,
    next_id: AtomicU64,
}

impl HttpClient {
    /// Reads the credential from the environment variable named in `config`.
    pub fn from_config(config: &ClientConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let credential = match &config.credential_env {
            Some(var) => {
                Some(std::env::var(var).map_err(|_| ConfigError::MissingCredential(var.clone()))?)
            }
            None => None,
        };
        Ok(Self::with_credential(config.clone(), credential))
    }

    pub fn with_credential(config: ClientConfig, credential: Option<String>) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        let gate = InFlight::new(config.max_in_flight);
        Self {
            agent,
            config,
            credential,
            gate,
            next_id: AtomicU64::new(1),
        }
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    pub fn request_body(&self, req: &CompletionRequest) -> Value {
        let mut messages = Vec::new();
        if !req.system_text.is_empty() {
            messages.push(json!({"role": "system", "content": req.system_text}));
        }
        messages.push(json!({"role": "user", "content": req.user_text}));
        json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        })
    }
}

/// Pulls text and token counts out of a response body.
pub fn parse_completion(body: &Value, config: &ClientConfig) -> Result<Completion, ClientError> {
    let text = body
        .pointer(&config.text_path)
        .and_then(Value::as_str)
        .ok_or_else(|| ClientError::Malformed(format!("no text at {}", config.text_path)))?;
    let count = |path: &str| {
        body.pointer(path)
            .and_then(Value::as_u64)
            .ok_or_else(|| ClientError::Malformed(format!("no count at {path}")))
    };
    Ok(Completion {
        text: text.to_string(),
        usage: TokenUsage {
            prompt_tokens: count(&config.prompt_tokens_path)?,
            completion_tokens: count(&config.completion_tokens_path)?,
        },
    })
}

impl TextClient for HttpClient {
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ClientError> {
        let _permit = self.gate.acquire();
        let id = self.next_id.fetch_add(1, Ordering::Relaxed).to_string();
        let mut call = self
            .agent
            .post(&self.config.endpoint)
            .set("content-type", "application/json")
            .set(CORRELATION_HEADER, &id);
        if let Some(token) = &self.credential {
            call = call.set("authorization", &format!("Bearer {token}"));
        }
        let response = match call.send_string(&self.request_body(request).to_string()) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) => {
                return Err(ClientError::Transport(format!(
                    "request {id}: status {code}"
                )))
            }
            Err(ureq::Error::Transport(t)) => {
                let msg = t.to_string();
                return Err(if msg.contains("timed out") {
                    ClientError::Timeout
                } else {
                    ClientError::Transport(format!("request {id}: {msg}"))
                });
            }
        };
        if let Some(echo) = response.header(CORRELATION_HEADER) {
            if echo != id {
                return Err(ClientError::Malformed(format!(
                    "response for {echo} received on request {id}"
                )));
            }
        }
        let text = response
            .into_string()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let body: Value =
            serde_json::from_str(&text).map_err(|e| ClientError::Malformed(e.to_string()))?;
        parse_completion(&body, &self.config)
    }
}
