//! One reply-generation contract over interchangeable chat-completion
//! providers.

mod http;
mod scripted;

pub use http::{
    ChatCompletionProvider, ReqwestTransport, RetryClock, SystemRetryClock, Transport, TransportError,
    TransportResponse,
};
pub use scripted::{next_scripted_reply, ScriptedProvider};

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::strip_control_chars;

pub const ENV_PROVIDER: &str = "PULSECHAT_LLM_PROVIDER";
pub const ENV_BASE_URL: &str = "PULSECHAT_LLM_BASE_URL";
pub const ENV_MODEL: &str = "PULSECHAT_LLM_MODEL";
pub const ENV_API_KEY: &str = "PULSECHAT_LLM_API_KEY";
pub const ENV_TIMEOUT_MS: &str = "PULSECHAT_LLM_TIMEOUT_MS";
pub const ENV_SCRIPT_FILE: &str = "PULSECHAT_SCRIPT_FILE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Author {
    Assistant,
    Participant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub author: Author,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f32,
    pub max_output_tokens: u32,
    #[serde(with = "duration_ms")]
    pub timeout: Duration,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            max_output_tokens: 400,
            timeout: Duration::from_secs(30),
        }
    }
}

mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub system_text: String,
    pub history: Vec<HistoryEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directive_text: Option<String>,
    pub params: GenerationParams,
}

impl GenerationRequest {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.system_text.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("system text is empty".into()));
        }
        if !(0.0..=2.0).contains(&self.params.temperature) {
            return Err(GatewayError::InvalidRequest("temperature must be within 0..=2".into()));
        }
        if self.params.max_output_tokens == 0 {
            return Err(GatewayError::InvalidRequest("max_output_tokens must be at least 1".into()));
        }
        if self.params.timeout.is_zero() {
            return Err(GatewayError::InvalidRequest("timeout must be positive".into()));
        }
        let consecutive = self
            .history
            .windows(2)
            .any(|w| w[0].author == Author::Participant && w[1].author == Author::Participant);
        if consecutive {
            return Err(GatewayError::InvalidRequest(
                "history has two consecutive participant entries".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("provider unavailable after {attempts} attempt(s): {last_error}")]
    ProviderUnavailable { attempts: u32, last_error: String },
    #[error("provider rejected the request (status {status}): {message}")]
    ProviderRejected { status: u16, message: String },
    #[error("provider returned an empty completion")]
    EmptyCompletion,
    #[error("scripted replies exhausted after {len} entries")]
    ScriptExhausted { len: usize },
    #[error("invalid generation request: {0}")]
    InvalidRequest(String),
    #[error("provider configuration error: {0}")]
    Config(String),
}

/// Anything that can turn a request into assistant text.
pub trait ReplySource: Send + Sync {
    fn generate_reply(&self, request: &GenerationRequest) -> Result<String, GatewayError>;
}

/// Post-processing shared by every provider: control characters are removed
/// and blank output becomes `EmptyCompletion`.
pub fn finish_reply(raw: &str) -> Result<String, GatewayError> {
    let cleaned = strip_control_chars(raw);
    let trimmed = cleaned.trim();
    if trimmed.is_empty() {
        return Err(GatewayError::EmptyCompletion);
    }
    Ok(trimmed.to_string())
}

/// A credential that never prints.
#[derive(Clone, PartialEq, Eq)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Replaces any occurrence of the secret in `text`.
    pub fn redact(&self, text: &str) -> String {
        if self.0.is_empty() {
            text.to_string()
        } else {
            text.replace(&self.0, "[REDACTED]")
        }
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret([REDACTED])")
    }
}

impl fmt::Display for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[REDACTED]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            initial_backoff: Duration::from_millis(250),
            max_backoff: Duration::from_secs(4),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): doubling from the initial
    /// backoff, capped.
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 2u32.saturating_pow(retry.saturating_sub(1));
        self.initial_backoff.saturating_mul(factor).min(self.max_backoff)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model_name: String,
    pub credential: Secret,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

/// Which provider the environment asks for.
#[derive(Debug, Clone, PartialEq)]
pub enum ProviderSelection {
    Scripted { script_file: String },
    ChatCompletion(ProviderConfig),
}

impl ProviderSelection {
    /// Reads the provider variables through `lookup` so tests need not touch
    /// the process environment.
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, GatewayError> {
        let provider = lookup(ENV_PROVIDER).unwrap_or_else(|| "http".into());
        match provider.trim().to_ascii_lowercase().as_str() {
            "scripted" => {
                let script_file = lookup(ENV_SCRIPT_FILE)
                    .filter(|s| !s.trim().is_empty())
                    .ok_or_else(|| GatewayError::Config(format!("{ENV_SCRIPT_FILE} is required for the scripted provider")))?;
                Ok(Self::Scripted { script_file })
            }
            "http" | "openai" | "chat" => {
                let base_url = lookup(ENV_BASE_URL)
                    .filter(|s| !s.trim().is_empty())
                    .ok_or_else(|| GatewayError::Config(format!("{ENV_BASE_URL} is not set")))?;
                let model_name = lookup(ENV_MODEL)
                    .filter(|s| !s.trim().is_empty())
                    .ok_or_else(|| GatewayError::Config(format!("{ENV_MODEL} is not set")))?;
                let credential = Secret::new(lookup(ENV_API_KEY).unwrap_or_default());
                let timeout = match lookup(ENV_TIMEOUT_MS) {
                    Some(raw) => {
                        let ms: u64 = raw
                            .trim()
                            .parse()
                            .map_err(|_| GatewayError::Config(format!("{ENV_TIMEOUT_MS} must be an integer")))?;
                        if ms == 0 {
                            return Err(GatewayError::Config(format!("{ENV_TIMEOUT_MS} must be positive")));
                        }
                        Duration::from_millis(ms)
                    }
                    None => GenerationParams::default().timeout,
                };
                Ok(Self::ChatCompletion(ProviderConfig {
                    base_url,
                    model_name,
                    credential,
                    retry: RetryPolicy::default(),
                    timeout,
                }))
            }
            other => Err(GatewayError::Config(format!("unknown provider {other:?}"))),
        }
    }
}
