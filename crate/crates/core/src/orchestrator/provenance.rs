use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::case_model::{DisorderType, GradeLevel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedChunk {
    pub chunk_id: String,
    pub similarity: f64,
}

/// Where a generated case came from: the retrieved context, the template,
/// the model and the exact request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub retrieved: Vec<RetrievedChunk>,
    pub template_id: String,
    pub model_id: String,
    pub request_digest: String,
    pub timestamp: DateTime<Utc>,
    /// Completion attempts used, 1 when the first answer was accepted.
    pub attempts: u32,
    pub disorders: Vec<DisorderType>,
    pub grade: GradeLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn chunk_ids(&self) -> Vec<&str> {
        self.retrieved.iter().map(|r| r.chunk_id.as_str()).collect()
    }
}
