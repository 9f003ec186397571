use std::time::Duration;

use serde_json::{json, Value};

use super::{Chunk, DocumentMetadata, EmbeddedChunk};

pub const DEFAULT_DIMENSION: usize = 1536;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("embedding provider unreachable: {0}")]
    ProviderUnreachable(String),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad embedding response: {0}")]
    BadResponse(String),
}

impl EmbedError {
    pub fn code(&self) -> &'static str {
        match self {
            EmbedError::ProviderUnreachable(_) => "provider_unreachable",
            EmbedError::DimensionMismatch { .. } => "dimension_mismatch",
            EmbedError::BadResponse(_) => "provider_error",
        }
    }
}

pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;
    /// One vector per input text, in input order.
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError>;
}

/// Embeds the chunks of one document, preserving order.
pub fn embed_chunks(
    chunks: &[Chunk],
    metadata: &DocumentMetadata,
    embedder: &dyn Embedder,
) -> Result<Vec<EmbeddedChunk>, EmbedError> {
    if chunks.is_empty() {
        return Ok(Vec::new());
    }
    let texts: Vec<&str> = chunks.iter().map(|c| c.text.as_str()).collect();
    let vectors = embedder.embed(&texts)?;
    if vectors.len() != chunks.len() {
        return Err(EmbedError::BadResponse(format!(
            "{} vectors for {} chunks",
            vectors.len(),
            chunks.len()
        )));
    }
    let dim = embedder.dimension();
    chunks
        .iter()
        .zip(vectors)
        .map(|(chunk, vector)| {
            if vector.len() != dim {
                return Err(EmbedError::DimensionMismatch { expected: dim, got: vector.len() });
            }
            if vector.iter().all(|x| *x == 0.0) {
                return Err(EmbedError::BadResponse(format!("zero vector for {}", chunk.id())));
            }
            Ok(EmbeddedChunk { chunk: chunk.clone(), vector, metadata: metadata.clone() })
        })
        .collect()
}

/// Deterministic offline embedder: hashed bag of lowercase word tokens,
/// normalised to unit length. Texts that share words get positive cosine
/// similarity, which keeps retrieval over the fixture corpus meaningful.
#[derive(Debug, Clone)]
pub struct FixtureEmbedder {
    dimension: usize,
}

impl Default for FixtureEmbedder {
    fn default() -> Self {
        FixtureEmbedder { dimension: DEFAULT_DIMENSION }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl FixtureEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        FixtureEmbedder { dimension }
    }

    pub fn embed_one(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0f64; self.dimension];
        let lower = text.to_lowercase();
        for token in lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            let h = fnv1a(token.as_bytes());
            let slot = (h % self.dimension as u64) as usize;
            let sign = if (h >> 63) == 0 { 1.0 } else { -1.0 };
            v[slot] += sign;
        }
        if v.iter().all(|x| *x == 0.0) {
            // no word tokens: fall back to a seeded pseudo-random direction
            let mut state = fnv1a(text.as_bytes()) | 1;
            for x in v.iter_mut() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                *x = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| (x / norm) as f32).collect()
    }
}

impl Embedder for FixtureEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// OpenAI-compatible `/embeddings` client.
pub struct HttpEmbedder {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    dimension: usize,
    batch_size: usize,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpEmbedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpEmbedder")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("dimension", &self.dimension)
            .finish_non_exhaustive()
    }
}

impl HttpEmbedder {
    /// `api_key_env` names the environment variable holding the bearer token.
    pub fn new(endpoint: &str, model: &str, api_key_env: Option<&str>, dimension: usize) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpEmbedder {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            api_key: api_key_env.and_then(|k| std::env::var(k).ok()),
            dimension,
            batch_size: 64,
            agent,
        }
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(json!({ "model": self.model, "input": texts }))
            .map_err(|e| EmbedError::ProviderUnreachable(e.to_string()))?;
        let status = resp.status().as_u16();
        if status >= 400 {
            return Err(EmbedError::BadResponse(format!("http status {status}")));
        }
        let body: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| EmbedError::BadResponse(e.to_string()))?;
        let data = body
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| EmbedError::BadResponse("missing data array".into()))?;
        let mut out: Vec<(usize, Vec<f32>)> = Vec::with_capacity(data.len());
        for (pos, item) in data.iter().enumerate() {
            let index = item.get("index").and_then(Value::as_u64).map_or(pos, |i| i as usize);
            let vector: Vec<f32> = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| EmbedError::BadResponse("missing embedding".into()))?
                .iter()
                .map(|x| x.as_f64().unwrap_or(0.0) as f32)
                .collect();
            if vector.len() != self.dimension {
                return Err(EmbedError::DimensionMismatch { expected: self.dimension, got: vector.len() });
            }
            out.push((index, vector));
        }
        out.sort_by_key(|(i, _)| *i);
        Ok(out.into_iter().map(|(_, v)| v).collect())
    }
}

impl Embedder for HttpEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.batch_size) {
            out.extend(self.embed_batch(batch)?);
        }
        Ok(out)
    }
}
