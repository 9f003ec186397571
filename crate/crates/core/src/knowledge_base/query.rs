use serde::{Deserialize, Serialize};

use super::{KbError, MetadataFilter, RetrievalResult};
use crate::case_model::{DisorderType, GradeLevel};

pub const DEFAULT_K: usize = 10;

fn default_k() -> usize {
    DEFAULT_K
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeQuery {
    pub disorders: Vec<DisorderType>,
    pub grade: GradeLevel,
    #[serde(default)]
    pub population_spec: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata_filter: Option<MetadataFilter>,
}

impl KnowledgeQuery {
    pub fn new(disorders: Vec<DisorderType>, grade: GradeLevel, population_spec: &str) -> Self {
        KnowledgeQuery {
            disorders,
            grade,
            population_spec: population_spec.to_string(),
            k: DEFAULT_K,
            metadata_filter: None,
        }
    }
}

/// Query text: disorder display names, then the grade, then the population
/// description when present, separated by single spaces.
pub fn build_query(req: &KnowledgeQuery) -> Result<String, KbError> {
    if req.disorders.is_empty() {
        return Err(KbError::NoDisorders);
    }
    let mut parts: Vec<String> = req.disorders.iter().map(|d| d.display_name().to_string()).collect();
    parts.push(req.grade.display_name());
    let spec = req.population_spec.split_whitespace().collect::<Vec<_>>().join(" ");
    if !spec.is_empty() {
        parts.push(spec);
    }
    Ok(parts.join(" "))
}

/// Concatenates retrieved chunks, each under a `[collection | doc_id | chunk_index]` header.
pub fn format_context(results: &[RetrievalResult]) -> String {
    results
        .iter()
        .map(|r| {
            let c = &r.embedded_chunk;
            format!("[{} | {} | {}]\n{}", c.metadata.collection, c.chunk.doc_id, c.chunk.chunk_index, c.chunk.text)
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge_base::{Chunk, Collection, DocumentMetadata, EmbeddedChunk};

    #[test]
    fn articulation_second_grade() {
        let q = KnowledgeQuery::new(vec![DisorderType::Articulation], GradeLevel::grade(2).unwrap(), "");
        assert_eq!(build_query(&q).unwrap(), "Articulation Disorders 2nd Grade");
    }

    #[test]
    fn combined_disorders_named() {
        let q = KnowledgeQuery::new(
            vec![DisorderType::Fluency, DisorderType::PragmaticLanguage],
            GradeLevel::grade(10).unwrap(),
            "  bilingual   student ",
        );
        let text = build_query(&q).unwrap();
        assert_eq!(text, "Fluency Disorders Pragmatic Language Disorders 10th Grade bilingual student");
    }

    #[test]
    fn no_disorders() {
        let q = KnowledgeQuery::new(vec![], GradeLevel::KINDERGARTEN, "");
        assert!(matches!(build_query(&q), Err(KbError::NoDisorders)));
    }

    #[test]
    fn context_headers() {
        assert_eq!(format_context(&[]), "");
        let r = RetrievalResult {
            embedded_chunk: EmbeddedChunk {
                chunk: Chunk { doc_id: "asha-01".into(), chunk_index: 4, text: "Body text.".into(), char_span: (0, 10) },
                vector: vec![1.0],
                metadata: DocumentMetadata {
                    doc_id: "asha-01".into(),
                    collection: Collection::ClinicalGuidelines,
                    source_type: "guideline".into(),
                    date: None,
                },
            },
            similarity: 0.5,
        };
        assert_eq!(format_context(&[r]), "[clinical_guidelines | asha-01 | 4]\nBody text.");
    }
}
