use std::path::{Path, PathBuf};

use caseforge_core::llm_gateway::{ModelSpec, DEFAULT_MAX_CONCURRENCY};
use caseforge_core::orchestrator::OrchestratorConfig;
use caseforge_core::quality::RubricConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbedderConfig {
    /// Deterministic hashed embeddings; no network.
    Fixture { dimension: usize },
    /// OpenAI-compatible embeddings endpoint. The key is read from `api_key_env`.
    Http { endpoint: String, model: String, dimension: usize, api_key_env: Option<String> },
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig::Fixture { dimension: caseforge_core::knowledge_base::DEFAULT_DIMENSION }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnowledgeConfig {
    /// Vector store file. Unset means the bundled corpus, held in memory.
    pub store_path: Option<PathBuf>,
    pub embedder: EmbedderConfig,
}

/// Service and CLI settings. Secrets never appear here: providers and the
/// API token name environment variables instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    /// Case database file. Unset means an in-memory store.
    pub store_path: Option<PathBuf>,
    /// Directory of prompt templates; unset uses the bundled set.
    pub template_dir: Option<PathBuf>,
    pub knowledge: KnowledgeConfig,
    pub providers: Vec<ModelSpec>,
    /// Provider name used when a request names none.
    pub default_model: String,
    pub orchestrator: OrchestratorConfig,
    pub max_concurrency: usize,
    pub rubric: RubricConfig,
    pub bind: String,
    /// Environment variable with the static API token; unset disables auth.
    pub api_token_env: Option<String>,
    /// Moves generated timestamps onto a fixed clock (reproducible runs).
    pub fixed_clock: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            store_path: None,
            template_dir: None,
            knowledge: KnowledgeConfig::default(),
            providers: vec![ModelSpec::fixture("fixture")],
            default_model: "fixture".into(),
            orchestrator: OrchestratorConfig::default(),
            max_concurrency: DEFAULT_MAX_CONCURRENCY,
            rubric: RubricConfig::default(),
            bind: "127.0.0.1:8080".into(),
            api_token_env: None,
            fixed_clock: false,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: ServiceConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        ServiceConfig::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.orchestrator.workers == 0 {
            return Err(ConfigError::Invalid("orchestrator.workers must be at least 1".into()));
        }
        for p in &self.providers {
            p.validate().map_err(|e| ConfigError::Invalid(format!("provider {:?}: {e}", p.key())))?;
        }
        if !self.providers.is_empty() && self.model(None).is_none() {
            return Err(ConfigError::Invalid(format!("default_model {:?} is not a configured provider", self.default_model)));
        }
        Ok(())
    }

    /// Provider by name, or the default when `name` is `None`. The name
    /// "fixture" always resolves so offline runs need no configuration.
    pub fn model(&self, name: Option<&str>) -> Option<ModelSpec> {
        let want = name.unwrap_or(&self.default_model);
        self.providers
            .iter()
            .find(|p| p.key() == want || p.model_id == want)
            .cloned()
            .or_else(|| (want == "fixture").then(|| ModelSpec::fixture("fixture")))
    }

    /// Values of every secret-bearing environment variable that is set,
    /// for scrubbing outgoing messages.
    pub fn secret_values(&self) -> Vec<String> {
        let mut vars: Vec<&str> = self.providers.iter().filter_map(|p| p.auth_env_var.as_deref()).collect();
        if let EmbedderConfig::Http { api_key_env: Some(v), .. } = &self.knowledge.embedder {
            vars.push(v);
        }
        if let Some(v) = &self.api_token_env {
            vars.push(v);
        }
        vars.into_iter().filter_map(|v| std::env::var(v).ok()).filter(|s| !s.is_empty()).collect()
    }
}
