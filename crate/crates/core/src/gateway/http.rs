//! Chat-completion HTTP provider with bounded retries.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use tracing::{debug, warn};

use super::{finish_reply, Author, GatewayError, GenerationRequest, ProviderConfig, ReplySource, Secret};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportResponse {
    pub status: u16,
    pub body: String,
}

/// A failure below the HTTP status level: connect errors, timeouts, resets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError(pub String);

/// Sends one JSON POST. Swappable so retries can be exercised without a
/// network.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        credential: &Secret,
        body: &Value,
        timeout: Duration,
    ) -> Result<TransportResponse, TransportError>;
}

/// Time source and sleeper for the retry loop.
pub trait RetryClock: Send + Sync {
    fn elapsed(&self) -> Duration;
    fn sleep(&self, duration: Duration);
}

#[derive(Debug)]
pub struct SystemRetryClock {
    start: Instant,
}

impl Default for SystemRetryClock {
    fn default() -> Self {
        Self { start: Instant::now() }
    }
}

impl RetryClock for SystemRetryClock {
    fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

/// Blocking reqwest transport. The client is built on first use so that it
/// is created on the worker thread that makes the call.
#[derive(Debug, Default)]
pub struct ReqwestTransport {
    client: OnceLock<reqwest::blocking::Client>,
}

impl Transport for ReqwestTransport {
    fn post_json(
        &self,
        url: &str,
        credential: &Secret,
        body: &Value,
        timeout: Duration,
    ) -> Result<TransportResponse, TransportError> {
        let client = self.client.get_or_init(reqwest::blocking::Client::new);
        let mut request = client.post(url).timeout(timeout).json(body);
        if !credential.is_empty() {
            request = request.bearer_auth(credential.expose());
        }
        let response = request.send().map_err(|e| TransportError(e.without_url().to_string()))?;
        let status = response.status().as_u16();
        let body = response.text().map_err(|e| TransportError(e.without_url().to_string()))?;
        Ok(TransportResponse { status, body })
    }
}

pub struct ChatCompletionProvider {
    config: ProviderConfig,
    transport: Box<dyn Transport>,
    clock_factory: Box<dyn Fn() -> Box<dyn RetryClock> + Send + Sync>,
}

impl std::fmt::Debug for ChatCompletionProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChatCompletionProvider")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

fn is_transient(status: u16) -> bool {
    status == 408 || status == 429 || status >= 500
}

fn completions_url(base: &str) -> String {
    let base = base.trim_end_matches('/');
    if base.ends_with("/chat/completions") {
        base.to_string()
    } else {
        format!("{base}/chat/completions")
    }
}

/// Keeps provider error text short enough for logs and API errors.
fn summarize(text: &str) -> String {
    let one_line: String = text.chars().map(|c| if c.is_control() { ' ' } else { c }).collect();
    let mut out: String = one_line.trim().chars().take(200).collect();
    if one_line.trim().chars().count() > 200 {
        out.push('…');
    }
    out
}

impl ChatCompletionProvider {
    pub fn new(config: ProviderConfig) -> Self {
        Self::with_transport(config, Box::new(ReqwestTransport::default()))
    }

    pub fn with_transport(config: ProviderConfig, transport: Box<dyn Transport>) -> Self {
        Self {
            config,
            transport,
            clock_factory: Box::new(|| Box::new(SystemRetryClock::default())),
        }
    }

    /// Replaces the time source used by each call's retry loop.
    pub fn with_clock(mut self, factory: impl Fn() -> Box<dyn RetryClock> + Send + Sync + 'static) -> Self {
        self.clock_factory = Box::new(factory);
        self
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    /// The wire body: system text, history and an optional trailing directive
    /// as a messages array.
    pub fn request_body(&self, request: &GenerationRequest) -> Value {
        let mut messages = vec![json!({"role": "system", "content": request.system_text})];
        for entry in &request.history {
            let role = match entry.author {
                Author::Assistant => "assistant",
                Author::Participant => "user",
            };
            messages.push(json!({"role": role, "content": entry.text}));
        }
        if let Some(directive) = &request.directive_text {
            messages.push(json!({"role": "system", "content": directive}));
        }
        json!({
            "model": self.config.model_name,
            "messages": messages,
            "temperature": request.params.temperature,
            "max_tokens": request.params.max_output_tokens,
        })
    }

    fn parse_completion(&self, body: &str) -> Result<String, GatewayError> {
        let value: Value = serde_json::from_str(body).map_err(|_| GatewayError::EmptyCompletion)?;
        let content = value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or(GatewayError::EmptyCompletion)?;
        finish_reply(content)
    }
}

impl ReplySource for ChatCompletionProvider {
    fn generate_reply(&self, request: &GenerationRequest) -> Result<String, GatewayError> {
        request.validate()?;
        let secret = &self.config.credential;
        let url = completions_url(&self.config.base_url);
        let body = self.request_body(request);
        let per_attempt = self.config.timeout.min(request.params.timeout);
        let max_attempts = self.config.retry.max_attempts.max(1);
        let budget = per_attempt.saturating_mul(max_attempts);
        let clock = (self.clock_factory)();
        let mut last_error = String::from("no attempt made");
        let mut attempts = 0;
        while attempts < max_attempts {
            if attempts > 0 {
                let remaining = budget.saturating_sub(clock.elapsed());
                let delay = self.config.retry.backoff(attempts).min(remaining);
                if remaining.is_zero() {
                    break;
                }
                clock.sleep(delay);
            }
            let remaining = budget.saturating_sub(clock.elapsed());
            if remaining.is_zero() {
                break;
            }
            attempts += 1;
            debug!(attempt = attempts, model = %self.config.model_name, "calling chat completion provider");
            match self.transport.post_json(&url, secret, &body, per_attempt.min(remaining)) {
                Ok(resp) if (200..300).contains(&resp.status) => return self.parse_completion(&resp.body),
                Ok(resp) if is_transient(resp.status) => {
                    last_error = secret.redact(&format!("status {}: {}", resp.status, summarize(&resp.body)));
                    warn!(attempt = attempts, error = %last_error, "transient provider failure");
                }
                Ok(resp) => {
                    let message = secret.redact(&summarize(&resp.body));
                    warn!(status = resp.status, error = %message, "provider rejected request");
                    return Err(GatewayError::ProviderRejected {
                        status: resp.status,
                        message,
                    });
                }
                Err(TransportError(e)) => {
                    last_error = secret.redact(&summarize(&e));
                    warn!(attempt = attempts, error = %last_error, "provider transport failure");
                }
            }
        }
        Err(GatewayError::ProviderUnavailable { attempts, last_error })
    }
}
