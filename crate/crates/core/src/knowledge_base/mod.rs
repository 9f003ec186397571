//! Document ingestion, chunking, embedding and exact top-k retrieval.

mod chunker;
mod embedder;
mod manifest;
mod query;
mod store;

use std::path::Path;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use chunker::{
    chunk_id, ingest_document, split_ranges, Chunk, ChunkOptions, DEFAULT_CHUNK_OVERLAP,
    DEFAULT_CHUNK_SIZE, SEPARATORS,
};
pub use embedder::{
    embed_chunks, EmbedError, Embedder, FixtureEmbedder, HttpEmbedder, DEFAULT_DIMENSION,
};
pub use manifest::{bundled_corpus, load_manifest, ManifestRecord};
pub use query::{build_query, format_context, KnowledgeQuery, DEFAULT_K};
pub use store::{cosine, MetadataFilter, RetrievalResult, VectorStore, VectorStoreHandle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collection {
    ClinicalGuidelines,
    DevelopmentalMilestones,
    IepExemplars,
    SchoolPolicy,
}

impl Collection {
    pub const ALL: [Collection; 4] = [
        Collection::ClinicalGuidelines,
        Collection::DevelopmentalMilestones,
        Collection::IepExemplars,
        Collection::SchoolPolicy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Collection::ClinicalGuidelines => "clinical_guidelines",
            Collection::DevelopmentalMilestones => "developmental_milestones",
            Collection::IepExemplars => "iep_exemplars",
            Collection::SchoolPolicy => "school_policy",
        }
    }

    pub fn parse(s: &str) -> Option<Collection> {
        Collection::ALL.into_iter().find(|c| c.as_str() == s.trim())
    }
}

impl std::fmt::Display for Collection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub doc_id: String,
    pub collection: Collection,
    pub source_type: String,
    pub date: Option<NaiveDate>,
    pub text: String,
}

impl SourceDocument {
    pub fn metadata(&self) -> DocumentMetadata {
        DocumentMetadata {
            doc_id: self.doc_id.clone(),
            collection: self.collection,
            source_type: self.source_type.clone(),
            date: self.date,
        }
    }
}

/// Document metadata copied onto every embedded chunk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMetadata {
    pub doc_id: String,
    pub collection: Collection,
    pub source_type: String,
    pub date: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedChunk {
    pub chunk: Chunk,
    pub vector: Vec<f32>,
    pub metadata: DocumentMetadata,
}

impl EmbeddedChunk {
    pub fn id(&self) -> String {
        self.chunk.id()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("document {0} has no text")]
    EmptyDocument(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("query needs at least one disorder")]
    NoDisorders,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("storage i/o: {0}")]
    StorageIo(#[from] std::io::Error),
    #[error("corrupt store file: {0}")]
    Corrupt(String),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

impl KbError {
    pub fn code(&self) -> &'static str {
        match self {
            KbError::EmptyDocument(_) => "empty_document",
            KbError::InvalidParameters(_) => "invalid_parameters",
            KbError::NoDisorders => "no_disorders",
            KbError::DimensionMismatch { .. } => "dimension_mismatch",
            KbError::Embed(e) => e.code(),
            KbError::StorageIo(_) | KbError::Corrupt(_) => "storage_io",
            KbError::Manifest { .. } => "invalid_manifest",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub documents: usize,
    pub chunks: usize,
}

/// An embedder paired with a vector store.
#[derive(Clone)]
pub struct KnowledgeBase {
    store: VectorStoreHandle,
    embedder: Arc<dyn Embedder>,
}

impl KnowledgeBase {
    pub fn new(store: VectorStoreHandle, embedder: Arc<dyn Embedder>) -> Self {
        KnowledgeBase { store, embedder }
    }

    /// In-memory store over the bundled synthetic corpus with the fixture embedder.
    pub fn bundled_fixture() -> Result<Self, KbError> {
        let kb = KnowledgeBase::new(
            Arc::new(VectorStore::in_memory()),
            Arc::new(FixtureEmbedder::default()),
        );
        kb.ingest(&bundled_corpus(), ChunkOptions::default())?;
        Ok(kb)
    }

    /// Opens (or creates) a file-backed store.
    pub fn open(path: &Path, embedder: Arc<dyn Embedder>) -> Result<Self, KbError> {
        Ok(KnowledgeBase::new(Arc::new(VectorStore::open(path)?), embedder))
    }

    pub fn store(&self) -> &VectorStoreHandle {
        &self.store
    }

    pub fn embedder(&self) -> &Arc<dyn Embedder> {
        &self.embedder
    }

    pub fn ingest(&self, docs: &[SourceDocument], opts: ChunkOptions) -> Result<IngestSummary, KbError> {
        let mut embedded = Vec::new();
        for doc in docs {
            let chunks = ingest_document(doc, opts)?;
            embedded.extend(embed_chunks(&chunks, &doc.metadata(), self.embedder.as_ref())?);
        }
        let summary = IngestSummary { documents: docs.len(), chunks: embedded.len() };
        self.store.index(embedded)?;
        Ok(summary)
    }

    /// Builds the query text, embeds it and retrieves the top-k chunks.
    pub fn search(&self, query: &KnowledgeQuery) -> Result<Vec<RetrievalResult>, KbError> {
        let text = build_query(query)?;
        let vector = self
            .embedder
            .embed(&[text.as_str()])?
            .pop()
            .ok_or_else(|| EmbedError::BadResponse("no query vector".into()))?;
        let filter = query.metadata_filter.clone().unwrap_or_default();
        self.store.retrieve(&vector, query.k, &filter)
    }
}
