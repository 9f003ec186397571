//! Configuration-declared HTTP adapters.
//!
//! An adapter is a JSON body template, a dotted path to the completion text
//! in the response, and an auth header. String nodes in the body equal to
//! `$model`, `$prompt`, `$temperature` or `$max_tokens` are replaced by the
//! request values, so new vendors need configuration only.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{GatewayError, LlmProvider, ModelSpec, ProviderKind, TokenUsage};
use crate::prompt_engine::RenderedPrompt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpAdapter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_endpoint: Option<String>,
    pub body: Value,
    /// Dotted path, numeric segments index arrays: `choices.0.message.content`.
    pub response_text_path: String,
    #[serde(default = "default_auth_header")]
    pub auth_header: String,
    #[serde(default)]
    pub auth_prefix: String,
    #[serde(default)]
    pub extra_headers: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_tokens_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_tokens_path: Option<String>,
}

fn default_auth_header() -> String {
    "Authorization".into()
}

/// A named preset or a full adapter definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdapterSpec {
    Preset(String),
    Custom(Box<HttpAdapter>),
}

impl AdapterSpec {
    pub fn resolve(&self) -> Result<HttpAdapter, GatewayError> {
        match self {
            AdapterSpec::Preset(name) => HttpAdapter::preset(name)
                .ok_or_else(|| GatewayError::InvalidSpec(format!("unknown adapter preset {name}"))),
            AdapterSpec::Custom(a) => Ok((**a).clone()),
        }
    }
}

impl HttpAdapter {
    pub fn preset(name: &str) -> Option<HttpAdapter> {
        match name {
            "openai_chat" => Some(HttpAdapter {
                default_endpoint: Some("https://api.openai.com/v1/chat/completions".into()),
                body: json!({
                    "model": "$model",
                    "temperature": "$temperature",
                    "max_tokens": "$max_tokens",
                    "messages": [{"role": "user", "content": "$prompt"}]
                }),
                response_text_path: "choices.0.message.content".into(),
                auth_header: "Authorization".into(),
                auth_prefix: "Bearer ".into(),
                extra_headers: BTreeMap::new(),
                input_tokens_path: Some("usage.prompt_tokens".into()),
                output_tokens_path: Some("usage.completion_tokens".into()),
            }),
            "anthropic_messages" => Some(HttpAdapter {
                default_endpoint: Some("https://api.anthropic.com/v1/messages".into()),
                body: json!({
                    "model": "$model",
                    "temperature": "$temperature",
                    "max_tokens": "$max_tokens",
                    "messages": [{"role": "user", "content": "$prompt"}]
                }),
                response_text_path: "content.0.text".into(),
                auth_header: "x-api-key".into(),
                auth_prefix: String::new(),
                extra_headers: BTreeMap::from([("anthropic-version".into(), "2023-06-01".into())]),
                input_tokens_path: Some("usage.input_tokens".into()),
                output_tokens_path: Some("usage.output_tokens".into()),
            }),
            "ollama_generate" => Some(HttpAdapter {
                default_endpoint: Some("http://localhost:11434/api/generate".into()),
                body: json!({
                    "model": "$model",
                    "prompt": "$prompt",
                    "stream": false,
                    "options": {"temperature": "$temperature", "num_predict": "$max_tokens"}
                }),
                response_text_path: "response".into(),
                auth_header: "Authorization".into(),
                auth_prefix: "Bearer ".into(),
                extra_headers: BTreeMap::new(),
                input_tokens_path: Some("prompt_eval_count".into()),
                output_tokens_path: Some("eval_count".into()),
            }),
            _ => None,
        }
    }

    pub fn build_body(&self, spec: &ModelSpec, prompt: &str) -> Value {
        fn fill(v: &Value, spec: &ModelSpec, prompt: &str) -> Value {
            match v {
                Value::String(s) => match s.as_str() {
                    "$model" => json!(spec.model_id),
                    "$prompt" => json!(prompt),
                    "$temperature" => json!(spec.temperature),
                    "$max_tokens" => json!(spec.max_output_tokens),
                    _ => v.clone(),
                },
                Value::Array(items) => Value::Array(items.iter().map(|i| fill(i, spec, prompt)).collect()),
                Value::Object(map) => {
                    Value::Object(map.iter().map(|(k, i)| (k.clone(), fill(i, spec, prompt))).collect())
                }
                _ => v.clone(),
            }
        }
        fill(&self.body, spec, prompt)
    }
}

/// Looks up a dotted path in a JSON value.
pub fn value_at<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').filter(|s| !s.is_empty()).try_fold(v, |cur, seg| match cur {
        Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get(i)),
        Value::Object(map) => map.get(seg),
        _ => None,
    })
}

pub struct HttpProvider {
    adapter: HttpAdapter,
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(spec: &ModelSpec) -> Result<Self, GatewayError> {
        let adapter = match &spec.adapter {
            Some(a) => a.resolve()?,
            None => HttpAdapter::preset(match spec.provider_kind {
                ProviderKind::LocalRuntime => "ollama_generate",
                _ => "openai_chat",
            })
            .expect("preset exists"),
        };
        let endpoint = spec
            .endpoint
            .clone()
            .or_else(|| adapter.default_endpoint.clone())
            .ok_or_else(|| GatewayError::InvalidSpec("no endpoint configured".into()))?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(spec.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpProvider { adapter, endpoint, agent })
    }
}

fn status_error(status: u16, body: &str) -> GatewayError {
    let snippet: String = body.chars().take(200).collect();
    match status {
        401 | 403 => GatewayError::AuthFailure(format!("http {status}")),
        429 => GatewayError::RateLimited(format!("http {status}")),
        408 => GatewayError::Timeout(format!("http {status}")),
        s if s >= 500 => GatewayError::provider(format!("http {s}: {snippet}"), true),
        s => GatewayError::provider(format!("http {s}: {snippet}"), false),
    }
}

impl LlmProvider for HttpProvider {
    fn complete_once(
        &self,
        spec: &ModelSpec,
        prompt: &RenderedPrompt,
        _digest: &str,
    ) -> Result<(String, Option<TokenUsage>), GatewayError> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(var) = &spec.auth_env_var {
            let secret = std::env::var(var)
                .map_err(|_| GatewayError::AuthFailure(format!("environment variable {var} is not set")))?;
            req = req.header(&self.adapter.auth_header, &format!("{}{}", self.adapter.auth_prefix, secret));
        }
        for (k, v) in &self.adapter.extra_headers {
            req = req.header(k, v);
        }
        let body = self.adapter.build_body(spec, &prompt.text);
        let mut resp = req.send_json(&body).map_err(|e| match e {
            ureq::Error::Timeout(t) => GatewayError::Timeout(t.to_string()),
            other => GatewayError::provider(other.to_string(), true),
        })?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| GatewayError::provider(e.to_string(), true))?;
        if status >= 400 {
            return Err(status_error(status, &text));
        }
        let json: Value = serde_json::from_str(&text)
            .map_err(|e| GatewayError::provider(format!("response is not JSON: {e}"), false))?;
        let completion = value_at(&json, &self.adapter.response_text_path)
            .and_then(Value::as_str)
            .ok_or_else(|| {
                GatewayError::provider(format!("no text at {}", self.adapter.response_text_path), false)
            })?
            .to_string();
        let count = |p: &Option<String>| p.as_deref().and_then(|p| value_at(&json, p)).and_then(Value::as_u64);
        let usage = match (count(&self.adapter.input_tokens_path), count(&self.adapter.output_tokens_path)) {
            (Some(i), Some(o)) => Some(TokenUsage { input_tokens: i, output_tokens: o }),
            _ => None,
        };
        Ok((completion, usage))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ModelSpec {
        let mut s = ModelSpec::fixture("gpt-4o");
        s.provider_kind = ProviderKind::RemoteApi;
        s
    }

    #[test]
    fn body_template_filled_with_typed_values() {
        let a = HttpAdapter::preset("openai_chat").unwrap();
        let body = a.build_body(&spec(), "hello");
        assert_eq!(body["model"], "gpt-4o");
        assert_eq!(body["temperature"], 0.7);
        assert_eq!(body["max_tokens"], 8192);
        assert_eq!(body["messages"][0]["content"], "hello");
    }

    #[test]
    fn dotted_paths() {
        let v = json!({"choices": [{"message": {"content": "x"}}]});
        assert_eq!(value_at(&v, "choices.0.message.content"), Some(&json!("x")));
        assert_eq!(value_at(&v, "choices.1.message"), None);
    }

    #[test]
    fn status_mapping() {
        assert!(matches!(status_error(401, ""), GatewayError::AuthFailure(_)));
        assert!(matches!(status_error(429, ""), GatewayError::RateLimited(_)));
        assert!(status_error(502, "").is_transient());
        assert!(!status_error(400, "").is_transient());
    }

    #[test]
    fn adapter_spec_forms() {
        let p: AdapterSpec = serde_json::from_str("\"anthropic_messages\"").unwrap();
        assert_eq!(p.resolve().unwrap().auth_header, "x-api-key");
        let c: AdapterSpec = serde_json::from_value(json!({
            "body": {"m": "$model", "p": "$prompt"},
            "response_text_path": "out"
        }))
        .unwrap();
        assert_eq!(c.resolve().unwrap().auth_header, "Authorization");
        assert!(AdapterSpec::Preset("nope".into()).resolve().is_err());
    }

    #[test]
    fn missing_secret_is_auth_failure() {
        let mut s = spec();
        s.endpoint = Some("http://127.0.0.1:9/v1".into());
        s.auth_env_var = Some("CASEFORGE_TEST_UNSET_KEY".into());
        let p = HttpProvider::new(&s).unwrap();
        let prompt = RenderedPrompt { text: "x".into(), template_id: "t".into(), placeholder_bindings: Default::default() };
        assert!(matches!(p.complete_once(&s, &prompt, ""), Err(GatewayError::AuthFailure(_))));
    }
}
