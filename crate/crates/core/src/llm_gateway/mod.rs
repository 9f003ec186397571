//! Completion interface over HTTP providers and a deterministic fixture,
//! plus extraction of the case JSON from raw model output.

mod extract;
mod fixture;
mod http;
mod synth;

use std::collections::HashMap;
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::prompt_engine::{ModelClass, RenderedPrompt};
use crate::util::sha256_hex;

pub(crate) use extract::first_json_object;
pub use extract::{extract_json, extract_json_text, ExtractionOutcome, ExtractionStatus};
pub use fixture::{FixtureProvider, ScriptStep};
pub use http::{AdapterSpec, HttpAdapter, HttpProvider};
pub use synth::{synthesize_case, PopulationFields};

pub const DEFAULT_TEMPERATURE: f64 = 0.7;
pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 8192;
pub const DEFAULT_TIMEOUT_SECS: u64 = 120;
pub const DEFAULT_MAX_CONCURRENCY: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    RemoteApi,
    LocalRuntime,
    Fixture,
}

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}
fn default_max_tokens() -> u32 {
    DEFAULT_MAX_OUTPUT_TOKENS
}
fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_SECS
}

/// One configured model. The `auth_env_var` names an environment variable;
/// the secret itself is never stored here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Configuration name; defaults to the model id.
    #[serde(default)]
    pub name: String,
    pub provider_kind: ProviderKind,
    pub model_id: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_output_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env_var: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adapter: Option<AdapterSpec>,
    /// Overrides the manifest's model-id to template mapping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_class: Option<ModelClass>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

impl ModelSpec {
    pub fn fixture(model_id: &str) -> Self {
        ModelSpec {
            name: model_id.to_string(),
            provider_kind: ProviderKind::Fixture,
            model_id: model_id.to_string(),
            temperature: DEFAULT_TEMPERATURE,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            endpoint: None,
            auth_env_var: None,
            adapter: None,
            model_class: None,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
        }
    }

    pub fn key(&self) -> &str {
        if self.name.is_empty() {
            &self.model_id
        } else {
            &self.name
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidSpec(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.model_id.trim().is_empty() {
            return Err(GatewayError::InvalidSpec("empty model id".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCompletion {
    pub text: String,
    pub model_id: String,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_usage: Option<TokenUsage>,
    pub request_digest: String,
    /// Provider calls made, including retries.
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GatewayError {
    #[error("authentication failed: {0}")]
    AuthFailure(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("provider error: {message}")]
    ProviderError { message: String, transient: bool },
    #[error("provider at capacity: {0}")]
    Overloaded(String),
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("prompt is empty")]
    EmptyPrompt,
}

impl GatewayError {
    pub fn provider(message: impl Into<String>, transient: bool) -> Self {
        GatewayError::ProviderError { message: message.into(), transient }
    }

    pub fn code(&self) -> &'static str {
        match self {
            GatewayError::AuthFailure(_) => "auth_failure",
            GatewayError::RateLimited(_) => "rate_limited",
            GatewayError::Timeout(_) => "timeout",
            GatewayError::ProviderError { .. } => "provider_error",
            GatewayError::Overloaded(_) => "overloaded",
            GatewayError::InvalidSpec(_) | GatewayError::EmptyPrompt => "invalid_request",
        }
    }

    pub fn is_transient(&self) -> bool {
        match self {
            GatewayError::RateLimited(_) | GatewayError::Timeout(_) => true,
            GatewayError::ProviderError { transient, .. } => *transient,
            _ => false,
        }
    }
}

/// A single provider call. Retries and concurrency limits live in [`LlmGateway`].
pub trait LlmProvider: Send + Sync {
    fn complete_once(
        &self,
        spec: &ModelSpec,
        prompt: &RenderedPrompt,
        digest: &str,
    ) -> Result<(String, Option<TokenUsage>), GatewayError>;
}

/// SHA-256 over model id, temperature and prompt text, separated by NUL bytes.
pub fn request_digest(model_id: &str, temperature: f64, prompt: &str) -> String {
    let mut bytes = Vec::with_capacity(model_id.len() + prompt.len() + 32);
    bytes.extend_from_slice(model_id.as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(format!("{temperature:.4}").as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(prompt.as_bytes());
    sha256_hex(&bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, base_delay_ms: 500 }
    }
}

impl RetryPolicy {
    pub fn no_delay() -> Self {
        RetryPolicy { max_attempts: 3, base_delay_ms: 0 }
    }

    /// Delay before retry number `retry` (1-based): base, 2 base, 4 base...
    pub fn delay(&self, retry: u32) -> Duration {
        Duration::from_millis(self.base_delay_ms.saturating_mul(1u64 << (retry - 1).min(16)))
    }
}

/// Counting semaphore.
#[derive(Debug)]
pub struct ConcurrencyLimiter {
    capacity: usize,
    in_use: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a> {
    limiter: &'a ConcurrencyLimiter,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.limiter.in_use.lock().unwrap() -= 1;
        self.limiter.freed.notify_one();
    }
}

impl ConcurrencyLimiter {
    pub fn new(capacity: usize) -> Self {
        ConcurrencyLimiter { capacity: capacity.max(1), in_use: Mutex::new(0), freed: Condvar::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn in_use(&self) -> usize {
        *self.in_use.lock().unwrap()
    }

    /// Waits up to `wait` for a free slot.
    pub fn acquire(&self, wait: Duration) -> Option<Permit<'_>> {
        let deadline = Instant::now() + wait;
        let mut used = self.in_use.lock().unwrap();
        while *used >= self.capacity {
            let now = Instant::now();
            if now >= deadline {
                return None;
            }
            used = self.freed.wait_timeout(used, deadline - now).unwrap().0;
        }
        *used += 1;
        Some(Permit { limiter: self })
    }
}

/// Routes requests to providers with retry and per-provider concurrency caps.
pub struct LlmGateway {
    retry: RetryPolicy,
    max_concurrency: usize,
    fixture: Arc<FixtureProvider>,
    overrides: RwLock<HashMap<String, Arc<dyn LlmProvider>>>,
    limiters: Mutex<HashMap<String, Arc<ConcurrencyLimiter>>>,
}

impl Default for LlmGateway {
    fn default() -> Self {
        LlmGateway::new(RetryPolicy::default(), DEFAULT_MAX_CONCURRENCY)
    }
}

impl LlmGateway {
    pub fn new(retry: RetryPolicy, max_concurrency: usize) -> Self {
        LlmGateway {
            retry,
            max_concurrency: max_concurrency.max(1),
            fixture: Arc::new(FixtureProvider::synthesizing()),
            overrides: RwLock::new(HashMap::new()),
            limiters: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_fixture(mut self, fixture: Arc<FixtureProvider>) -> Self {
        self.fixture = fixture;
        self
    }

    /// The provider answering every `ProviderKind::Fixture` spec.
    pub fn fixture(&self) -> &Arc<FixtureProvider> {
        &self.fixture
    }

    /// Routes the spec named `name` to `provider` regardless of its kind.
    pub fn register(&self, name: &str, provider: Arc<dyn LlmProvider>) {
        self.overrides.write().unwrap().insert(name.to_string(), provider);
    }

    pub fn limiter(&self, spec: &ModelSpec) -> Arc<ConcurrencyLimiter> {
        self.limiters
            .lock()
            .unwrap()
            .entry(spec.key().to_string())
            .or_insert_with(|| Arc::new(ConcurrencyLimiter::new(self.max_concurrency)))
            .clone()
    }

    fn provider(&self, spec: &ModelSpec) -> Result<Arc<dyn LlmProvider>, GatewayError> {
        if let Some(p) = self.overrides.read().unwrap().get(spec.key()) {
            return Ok(p.clone());
        }
        match spec.provider_kind {
            ProviderKind::Fixture => Ok(self.fixture.clone()),
            ProviderKind::RemoteApi | ProviderKind::LocalRuntime => Ok(Arc::new(HttpProvider::new(spec)?)),
        }
    }

    pub fn complete(&self, spec: &ModelSpec, prompt: &RenderedPrompt) -> Result<RawCompletion, GatewayError> {
        spec.validate()?;
        if prompt.text.trim().is_empty() {
            return Err(GatewayError::EmptyPrompt);
        }
        let provider = self.provider(spec)?;
        let digest = request_digest(&spec.model_id, spec.temperature, &prompt.text);
        let limiter = self.limiter(spec);
        let _permit = limiter
            .acquire(Duration::from_secs(spec.timeout_secs))
            .ok_or_else(|| GatewayError::Overloaded(spec.key().to_string()))?;

        let started = Instant::now();
        let mut attempt = 0;
        loop {
            attempt += 1;
            match provider.complete_once(spec, prompt, &digest) {
                Ok((text, token_usage)) => {
                    return Ok(RawCompletion {
                        text,
                        model_id: spec.model_id.clone(),
                        latency_ms: started.elapsed().as_millis() as u64,
                        token_usage,
                        request_digest: digest,
                        attempts: attempt,
                    })
                }
                Err(e) if e.is_transient() && attempt < self.retry.max_attempts => {
                    tracing::warn!(model = %spec.model_id, attempt, error = %e, "retrying completion");
                    std::thread::sleep(self.retry.delay(attempt));
                }
                Err(e) => return Err(e),
            }
        }
    }
}
