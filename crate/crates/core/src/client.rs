//! Transport-agnostic text completion contract with bounded retries.

use alloc::boxed::Box;
use alloc::string::String;
use core::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system_text: String,
    pub user_text: String,
    pub max_tokens: u32,
    pub temperature: f32,
}

impl CompletionRequest {
    /// Deterministic request (temperature 0).
    pub fn new(system_text: impl Into<String>, user_text: impl Into<String>) -> Self {
        Self {
            system_text: system_text.into(),
            user_text: user_text.into(),
            max_tokens: 2048,
            temperature: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub usage: TokenUsage,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("invalid request: {0}")]
    InvalidRequest(&'static str),
    #[error("request timed out")]
    Timeout,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted {
        attempts: u32,
        last: Box<ClientError>,
    },
}

impl ClientError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            ClientError::Timeout | ClientError::Transport(_) | ClientError::Malformed(_)
        )
    }
}

/// One completion call. Implementations do a single attempt; retries are
/// layered on top by [`complete_text`].
pub trait TextClient {
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ClientError>;
}

impl<T: TextClient + ?Sized> TextClient for &T {
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ClientError> {
        (**self).complete(request)
    }
}

pub trait Sleeper {
    fn sleep(&self, d: Duration);
}

/// Does not wait; for tests and offline use.
pub struct NoSleep;

impl Sleeper for NoSleep {
    fn sleep(&self, _: Duration) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 4,
            base_delay_ms: 500,
            max_delay_ms: 8_000,
        }
    }
}

impl RetryPolicy {
    /// Wait before attempt `n + 1`, after `n` failures.
    pub fn delay(&self, failures: u32) -> Duration {
        let factor = 1u64
            .checked_shl(failures.saturating_sub(1))
            .unwrap_or(u64::MAX);
        Duration::from_millis(
            self.base_delay_ms
                .saturating_mul(factor)
                .min(self.max_delay_ms),
        )
    }
}

/// Validates the request, then calls `client` with exponential backoff
/// until success, a non-retryable error, or `policy.max_attempts`.
pub fn complete_text<C, S>(
    client: &C,
    policy: &RetryPolicy,
    sleeper: &S,
    request: &CompletionRequest,
) -> Result<Completion, ClientError>
where
    C: TextClient + ?Sized,
    S: Sleeper + ?Sized,
{
    if request.user_text.trim().is_empty() {
        return Err(ClientError::InvalidRequest("empty user_text"));
    }
    if request.max_tokens == 0 {
        return Err(ClientError::InvalidRequest("max_tokens must be positive"));
    }
    let attempts = policy.max_attempts.max(1);
    let mut failures = 0;
    loop {
        match client.complete(request) {
            Ok(c) => return Ok(c),
            Err(e) if !e.is_retryable() => return Err(e),
            Err(e) => {
                failures += 1;
                if failures >= attempts {
                    return Err(ClientError::Exhausted {
                        attempts: failures,
                        last: Box::new(e),
                    });
                }
                sleeper.sleep(policy.delay(failures));
            }
        }
    }
}
