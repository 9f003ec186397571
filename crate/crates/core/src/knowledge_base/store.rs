//! Flat exact-search vector index with optional file persistence.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::{Collection, EmbeddedChunk, KbError};

pub type VectorStoreHandle = Arc<VectorStore>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collections: Option<Vec<Collection>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_ids: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_type: Option<String>,
}

impl MetadataFilter {
    pub fn collections(collections: &[Collection]) -> Self {
        MetadataFilter { collections: Some(collections.to_vec()), ..Default::default() }
    }

    pub fn accepts(&self, chunk: &EmbeddedChunk) -> bool {
        let m = &chunk.metadata;
        self.collections.as_ref().is_none_or(|c| c.contains(&m.collection))
            && self.doc_ids.as_ref().is_none_or(|d| d.contains(&m.doc_id))
            && self.source_type.as_ref().is_none_or(|s| *s == m.source_type)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub embedded_chunk: EmbeddedChunk,
    pub similarity: f64,
}

#[derive(Default, Serialize, Deserialize)]
struct StoreFile {
    dimension: Option<usize>,
    chunks: Vec<EmbeddedChunk>,
}

#[derive(Default)]
struct Inner {
    dimension: Option<usize>,
    chunks: Vec<EmbeddedChunk>,
    norms: Vec<f64>,
    by_id: HashMap<String, usize>,
}

impl Inner {
    fn insert(&mut self, chunk: EmbeddedChunk) {
        let norm = norm(&chunk.vector);
        match self.by_id.get(&chunk.id()) {
            Some(&i) => {
                self.chunks[i] = chunk;
                self.norms[i] = norm;
            }
            None => {
                self.by_id.insert(chunk.id(), self.chunks.len());
                self.chunks.push(chunk);
                self.norms.push(norm);
            }
        }
    }
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt()
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum()
}

/// Cosine similarity in f64, clamped to [-1, 1]; 0 if either vector is zero.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let d = norm(a) * norm(b);
    if d == 0.0 {
        0.0
    } else {
        (dot(a, b) / d).clamp(-1.0, 1.0)
    }
}

pub struct VectorStore {
    inner: RwLock<Inner>,
    path: Option<PathBuf>,
}

impl VectorStore {
    pub fn in_memory() -> Self {
        VectorStore { inner: RwLock::new(Inner::default()), path: None }
    }

    /// Opens a store persisted at `path`, creating an empty one if absent.
    pub fn open(path: &Path) -> Result<Self, KbError> {
        let mut inner = Inner::default();
        if path.exists() {
            let raw = fs::read(path)?;
            let file: StoreFile =
                serde_json::from_slice(&raw).map_err(|e| KbError::Corrupt(e.to_string()))?;
            inner.dimension = file.dimension;
            for chunk in file.chunks {
                inner.insert(chunk);
            }
        }
        Ok(VectorStore { inner: RwLock::new(inner), path: Some(path.to_path_buf()) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> Option<usize> {
        self.inner.read().unwrap().dimension
    }

    /// Adds or replaces chunks by id. Either every chunk is stored or none is.
    pub fn index(&self, chunks: Vec<EmbeddedChunk>) -> Result<(), KbError> {
        let mut inner = self.inner.write().unwrap();
        let mut dim = inner.dimension;
        for c in &chunks {
            match dim {
                Some(d) if d != c.vector.len() => {
                    return Err(KbError::DimensionMismatch { expected: d, got: c.vector.len() })
                }
                Some(_) => {}
                None => dim = Some(c.vector.len()),
            }
        }
        inner.dimension = dim;
        for c in chunks {
            inner.insert(c);
        }
        if let Some(path) = &self.path {
            persist(path, &inner)?;
        }
        Ok(())
    }

    pub fn get(&self, chunk_id: &str) -> Option<EmbeddedChunk> {
        let inner = self.inner.read().unwrap();
        inner.by_id.get(chunk_id).map(|&i| inner.chunks[i].clone())
    }

    pub fn chunk_ids(&self) -> Vec<String> {
        self.inner.read().unwrap().chunks.iter().map(EmbeddedChunk::id).collect()
    }

    /// Exact top-k by cosine similarity; ties broken by (doc_id, chunk_index).
    pub fn retrieve(
        &self,
        query: &[f32],
        k: usize,
        filter: &MetadataFilter,
    ) -> Result<Vec<RetrievalResult>, KbError> {
        if k == 0 {
            return Err(KbError::InvalidParameters("k must be at least 1".into()));
        }
        let inner = self.inner.read().unwrap();
        let Some(dim) = inner.dimension else {
            return Ok(Vec::new());
        };
        if query.len() != dim {
            return Err(KbError::DimensionMismatch { expected: dim, got: query.len() });
        }
        let qn = norm(query);
        let mut scored: Vec<(f64, usize)> = inner
            .chunks
            .iter()
            .enumerate()
            .filter(|(_, c)| filter.accepts(c))
            .map(|(i, c)| {
                let d = qn * inner.norms[i];
                let sim = if d == 0.0 { 0.0 } else { (dot(query, &c.vector) / d).clamp(-1.0, 1.0) };
                (sim, i)
            })
            .collect();
        scored.sort_by(|(sa, ia), (sb, ib)| {
            let (a, b) = (&inner.chunks[*ia].chunk, &inner.chunks[*ib].chunk);
            sb.partial_cmp(sa)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.doc_id.cmp(&b.doc_id))
                .then_with(|| a.chunk_index.cmp(&b.chunk_index))
        });
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(similarity, i)| RetrievalResult { embedded_chunk: inner.chunks[i].clone(), similarity })
            .collect())
    }
}

fn persist(path: &Path, inner: &Inner) -> Result<(), KbError> {
    let file = StoreFile { dimension: inner.dimension, chunks: inner.chunks.clone() };
    let bytes = serde_json::to_vec(&file).map_err(|e| KbError::Corrupt(e.to_string()))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge_base::{Chunk, DocumentMetadata};

    fn ec(doc: &str, i: usize, v: Vec<f32>, collection: Collection) -> EmbeddedChunk {
        EmbeddedChunk {
            chunk: Chunk { doc_id: doc.into(), chunk_index: i, text: format!("{doc}-{i}"), char_span: (0, 3) },
            vector: v,
            metadata: DocumentMetadata {
                doc_id: doc.into(),
                collection,
                source_type: "t".into(),
                date: None,
            },
        }
    }

    #[test]
    fn empty_store_returns_nothing() {
        let s = VectorStore::in_memory();
        s.index(vec![]).unwrap();
        assert!(s.retrieve(&[1.0, 0.0], 10, &MetadataFilter::default()).unwrap().is_empty());
    }

    #[test]
    fn exact_match_first_and_orthogonal_zero() {
        let s = VectorStore::in_memory();
        s.index(vec![
            ec("a", 0, vec![1.0, 0.0, 0.0], Collection::SchoolPolicy),
            ec("b", 0, vec![0.0, 1.0, 0.0], Collection::SchoolPolicy),
        ])
        .unwrap();
        let r = s.retrieve(&[0.0, 1.0, 0.0], 2, &MetadataFilter::default()).unwrap();
        assert_eq!(r[0].embedded_chunk.chunk.doc_id, "b");
        assert_eq!(r[0].similarity, 1.0);
        let r = s.retrieve(&[0.0, 0.0, 1.0], 2, &MetadataFilter::default()).unwrap();
        assert!(r.iter().all(|x| x.similarity == 0.0));
        // ties resolved by doc id
        assert_eq!(r[0].embedded_chunk.chunk.doc_id, "a");
    }

    #[test]
    fn dimension_checks() {
        let s = VectorStore::in_memory();
        s.index(vec![ec("a", 0, vec![1.0, 0.0], Collection::SchoolPolicy)]).unwrap();
        assert!(matches!(
            s.index(vec![ec("a", 1, vec![1.0], Collection::SchoolPolicy)]),
            Err(KbError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            s.retrieve(&[1.0], 1, &MetadataFilter::default()),
            Err(KbError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            s.retrieve(&[1.0, 0.0], 0, &MetadataFilter::default()),
            Err(KbError::InvalidParameters(_))
        ));
    }

    #[test]
    fn filter_by_collection() {
        let s = VectorStore::in_memory();
        s.index(vec![
            ec("a", 0, vec![1.0, 0.0], Collection::SchoolPolicy),
            ec("b", 0, vec![1.0, 0.1], Collection::IepExemplars),
        ])
        .unwrap();
        let f = MetadataFilter::collections(&[Collection::IepExemplars]);
        let r = s.retrieve(&[1.0, 0.0], 5, &f).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].embedded_chunk.metadata.collection, Collection::IepExemplars);
    }

    #[test]
    fn get_by_id_and_upsert() {
        let s = VectorStore::in_memory();
        let c = ec("a", 3, vec![0.5, 0.5], Collection::SchoolPolicy);
        s.index(vec![c.clone()]).unwrap();
        assert_eq!(s.get("a#3"), Some(c));
        s.index(vec![ec("a", 3, vec![0.1, 0.5], Collection::SchoolPolicy)]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get("a#3").unwrap().vector, vec![0.1, 0.5]);
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kb/store.json");
        let q = [0.3f32, -0.7, 0.2];
        let before = {
            let s = VectorStore::open(&path).unwrap();
            s.index(vec![
                ec("a", 0, vec![0.1, 0.2, 0.3], Collection::SchoolPolicy),
                ec("b", 1, vec![0.3, -0.6, 0.1], Collection::IepExemplars),
            ])
            .unwrap();
            s.retrieve(&q, 2, &MetadataFilter::default()).unwrap()
        };
        let s = VectorStore::open(&path).unwrap();
        assert_eq!(s.retrieve(&q, 2, &MetadataFilter::default()).unwrap(), before);
    }
}
