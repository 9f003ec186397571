//! JSON-lines corpus manifests and the bundled synthetic corpus.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{Collection, KbError, SourceDocument};

/// One manifest line. `doc_id` defaults to the file stem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub path: String,
    pub collection: Collection,
    pub source_type: String,
    #[serde(default)]
    pub date: Option<NaiveDate>,
    #[serde(default)]
    pub doc_id: Option<String>,
}

impl ManifestRecord {
    fn doc_id(&self) -> String {
        self.doc_id.clone().unwrap_or_else(|| {
            Path::new(&self.path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.path.clone())
        })
    }

    fn into_document(self, text: String) -> SourceDocument {
        SourceDocument {
            doc_id: self.doc_id(),
            collection: self.collection,
            source_type: self.source_type,
            date: self.date,
            text,
        }
    }
}

fn parse_records(raw: &str) -> Result<Vec<ManifestRecord>, KbError> {
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| KbError::Manifest { line: i + 1, message: e.to_string() })
        })
        .collect()
}

/// Loads every document listed in a manifest; paths are relative to the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<SourceDocument>, KbError> {
    let raw = fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_records(&raw)?
        .into_iter()
        .map(|rec| {
            let text = fs::read_to_string(base.join(&rec.path))?;
            Ok(rec.into_document(text))
        })
        .collect()
}

macro_rules! corpus_files {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../assets/corpus/", $name)))),*]
    };
}

const BUNDLED_MANIFEST: &str = include_str!("../../assets/corpus/manifest.jsonl");
const BUNDLED_FILES: &[(&str, &str)] = corpus_files!(
    "speech_sound_practice.txt",
    "phonological_processes.txt",
    "language_disorders_practice.txt",
    "pragmatic_social_communication.txt",
    "fluency_practice.txt",
    "voice_practice.txt",
    "assessment_instruments.txt",
    "speech_sound_milestones.txt",
    "language_milestones.txt",
    "iep_goal_exemplars.txt",
    "session_note_exemplars.txt",
    "case_history_exemplars.txt",
    "ard_process.txt",
    "service_delivery_policy.txt",
);

/// The small synthetic corpus shipped with the crate, for offline runs and tests.
pub fn bundled_corpus() -> Vec<SourceDocument> {
    let records = parse_records(BUNDLED_MANIFEST).expect("bundled manifest is valid");
    records
        .into_iter()
        .map(|rec| {
            let text = BUNDLED_FILES
                .iter()
                .find(|(name, _)| *name == rec.path)
                .map(|(_, text)| text.to_string())
                .unwrap_or_else(|| panic!("bundled corpus file {} missing", rec.path));
            rec.into_document(text)
        })
        .collect()
}
