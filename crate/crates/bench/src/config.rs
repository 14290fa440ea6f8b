//! Run configuration, read from TOML and checked before any work starts.

use std::path::{Path, PathBuf};

use multipath_core::client::RetryPolicy;
use multipath_core::dag::{ConfigError as GenerationConfigError, GenerationConfig};
use multipath_core::metrics::SpfMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_CREDENTIAL_ENV: &str = "MULTIPATH_API_KEY";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("generation: {0}")]
    Generation(#[from] GenerationConfigError),
    #[error("{0}")]
    Invalid(String),
    #[error("credential variable {0} is not set")]
    MissingCredential(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClientConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub credential_env: Option<String>,
    /// JSON pointers into the response body.
    pub text_path: String,
    pub prompt_tokens_path: String,
    pub completion_tokens_path: String,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    pub max_rounds: u32,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            model: String::from("default"),
            credential_env: Some(DEFAULT_CREDENTIAL_ENV.into()),
            text_path: "/choices/0/message/content".into(),
            prompt_tokens_path: "/usage/prompt_tokens".into(),
            completion_tokens_path: "/usage/completion_tokens".into(),
            timeout_secs: 120,
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            max_rounds: 3,
        }
    }
}

impl ClientConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(format!("client: {m}")));
        if !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://")) {
            return bad("endpoint must be an http(s) URL");
        }
        if self.model.trim().is_empty() {
            return bad("model is empty");
        }
        for p in [
            &self.text_path,
            &self.prompt_tokens_path,
            &self.completion_tokens_path,
        ] {
            if !p.starts_with('/') {
                return bad("response paths must be JSON pointers starting with `/`");
            }
        }
        if self.timeout_secs == 0 || self.max_in_flight == 0 || self.retry.max_attempts == 0 {
            return bad("timeout, in-flight limit and attempts must be positive");
        }
        if self
            .credential_env
            .as_deref()
            .is_some_and(|v| v.trim().is_empty())
        {
            return bad("credential_env is empty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProverConfig {
    /// Looked up on `PATH` as `prover9` when unset.
    pub binary: Option<PathBuf>,
    pub timeout_ms: u64,
}

impl Default for ProverConfig {
    fn default() -> Self {
        Self {
            binary: None,
            timeout_ms: 5_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub offline: bool,
    pub generation: GenerationConfig,
    pub client: Option<ClientConfig>,
    pub prover: ProverConfig,
    pub spf: SpfMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            workers: 4,
            offline: true,
            generation: GenerationConfig::default(),
            client: None,
            prover: ProverConfig::default(),
            spf: SpfMode::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.generation.validate()?;
        if self.workers == 0 {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        if self.prover.timeout_ms == 0 {
            return Err(ConfigError::Invalid(
                "prover timeout must be positive".into(),
            ));
        }
        match (&self.client, self.offline) {
            (Some(c), _) => c.validate(),
            (None, false) => Err(ConfigError::Invalid(
                "online mode needs a client endpoint".into(),
            )),
            (None, true) => Ok(()),
        }
    }

    /// The client section when online.
    pub fn online_client(&self) -> Option<&ClientConfig> {
        if self.offline {
            None
        } else {
            self.client.as_ref()
        }
    }

    /// SHA-256 over the generation parameters, seed excluded.
    pub fn config_hash(&self) -> String {
        let mut g = self.generation.clone();
        g.seed = 0;
        let json = serde_json::to_string(&g).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
