//! Speech transcript analysis: de-identification, disfluency detection,
//! articulation error candidates, word-based language metrics and an
//! optional LLM clinical read-out.

mod articulation;
mod clinical;
mod deid;
mod disfluency;
mod metrics;
mod names;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use articulation::{detect_articulation_candidates, edit_distance, ArticulationCandidate, CandidateKind};
pub(crate) use clinical::fixture_analysis;
pub use clinical::{analysis_prompt, analyze_clinical, parse_analysis, ClinicalAnalysis, ANALYSIS_TEMPLATE_ID, SECTIONS};
pub use deid::{deidentify, Deidentified, PiiCategory, Replacement};
pub use disfluency::{detect_disfluencies, DisfluencyCounts, DisfluencyOptions};
pub use metrics::{compute_language_metrics, words, LanguageMetrics, MorphFlag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub start_s: f64,
    pub end_s: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub utterances: Vec<Utterance>,
    /// ASR adapter name, or "manual".
    #[serde(default = "manual")]
    pub source: String,
}

fn manual() -> String {
    "manual".into()
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("transcript has no utterances")]
    EmptyTranscript,
    #[error("invalid transcript line {line}: {message}")]
    InvalidLine { line: usize, message: String },
    #[error("utterance {index}: {message}")]
    InvalidUtterance { index: usize, message: String },
    #[error("analysis response has no recognisable sections")]
    AnalysisUnparseable,
    #[error(transparent)]
    Gateway(#[from] crate::llm_gateway::GatewayError),
    #[error("transcript i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl TranscriptError {
    pub fn code(&self) -> &'static str {
        match self {
            TranscriptError::EmptyTranscript => "empty_transcript",
            TranscriptError::InvalidLine { .. } | TranscriptError::InvalidUtterance { .. } => "invalid_transcript",
            TranscriptError::AnalysisUnparseable => "analysis_unparseable",
            TranscriptError::Gateway(e) => e.code(),
            TranscriptError::Io(_) => "io_error",
        }
    }
}

impl Transcript {
    /// Untimed transcript, one utterance per string, one second apart.
    pub fn from_texts(texts: &[&str]) -> Self {
        Transcript {
            utterances: texts
                .iter()
                .enumerate()
                .map(|(i, t)| Utterance { start_s: i as f64, end_s: i as f64 + 1.0, text: t.to_string() })
                .collect(),
            source: manual(),
        }
    }

    /// Parses JSON-lines `{start_s, end_s, text}` records and validates them.
    pub fn from_jsonl(raw: &str) -> Result<Self, TranscriptError> {
        let utterances = raw
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str::<Utterance>(l)
                    .map_err(|e| TranscriptError::InvalidLine { line: i + 1, message: e.to_string() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let t = Transcript { utterances, source: manual() };
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self, TranscriptError> {
        Transcript::from_jsonl(&std::fs::read_to_string(path)?)
    }

    pub fn to_jsonl(&self) -> String {
        self.utterances
            .iter()
            .map(|u| serde_json::to_string(u).expect("utterance serializes"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn validate(&self) -> Result<(), TranscriptError> {
        let mut last_start = f64::NEG_INFINITY;
        for (index, u) in self.utterances.iter().enumerate() {
            let bad = |message: &str| TranscriptError::InvalidUtterance { index, message: message.to_string() };
            if u.text.trim().is_empty() {
                return Err(bad("empty text"));
            }
            if !(u.start_s.is_finite() && u.end_s.is_finite()) || u.end_s < u.start_s {
                return Err(bad("end precedes start"));
            }
            if u.start_s < last_start {
                return Err(bad("timestamps decrease"));
            }
            last_start = u.start_s;
        }
        Ok(())
    }

    /// Copy with every utterance de-identified.
    pub fn deidentified(&self) -> (Transcript, usize) {
        let mut replaced = 0;
        let utterances = self
            .utterances
            .iter()
            .map(|u| {
                let d = deidentify(&u.text);
                replaced += d.log.len();
                Utterance { text: d.text, ..u.clone() }
            })
            .collect();
        (Transcript { utterances, source: self.source.clone() }, replaced)
    }
}

/// Speech-to-text adapter. No model is bundled; implementations wrap an
/// external recognizer and return timestamped utterances.
pub trait AsrAdapter: Send + Sync {
    fn name(&self) -> &str;
    fn transcribe(&self, audio: &Path) -> Result<Transcript, TranscriptError>;
}

/// Reads a previously produced `<audio>.jsonl` transcript next to the audio file.
#[derive(Debug, Default, Clone)]
pub struct SidecarAsr;

impl AsrAdapter for SidecarAsr {
    fn name(&self) -> &str {
        "sidecar"
    }

    fn transcribe(&self, audio: &Path) -> Result<Transcript, TranscriptError> {
        let mut t = Transcript::load(&audio.with_extension("jsonl"))?;
        t.source = self.name().to_string();
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub sound_repetitions: usize,
    pub syllable_repetitions: usize,
    pub prolongations: usize,
    pub blocks: usize,
    pub articulation_candidates: Vec<ArticulationCandidate>,
    pub mlu_approx: f64,
    pub avg_word_length: f64,
    pub avg_sentence_length: f64,
    pub morphological_flags: Vec<MorphFlag>,
}

impl PatternReport {
    pub fn empty() -> Self {
        PatternReport {
            sound_repetitions: 0,
            syllable_repetitions: 0,
            prolongations: 0,
            blocks: 0,
            articulation_candidates: Vec::new(),
            mlu_approx: 0.0,
            avg_word_length: 0.0,
            avg_sentence_length: 0.0,
            morphological_flags: Vec::new(),
        }
    }
}

/// Full pattern report; `lexicon` maps expected words to their spellings.
pub fn analyze_transcript(
    transcript: &Transcript,
    lexicon: &std::collections::BTreeMap<String, String>,
    opts: &DisfluencyOptions,
) -> Result<PatternReport, TranscriptError> {
    let d = detect_disfluencies(transcript, opts);
    let m = compute_language_metrics(transcript)?;
    Ok(PatternReport {
        sound_repetitions: d.sound_repetitions,
        syllable_repetitions: d.syllable_repetitions,
        prolongations: d.prolongations,
        blocks: d.blocks,
        articulation_candidates: detect_articulation_candidates(transcript, lexicon),
        mlu_approx: m.mlu_approx,
        avg_word_length: m.avg_word_length,
        avg_sentence_length: m.avg_sentence_length,
        morphological_flags: m.morphological_flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let raw = "{\"start_s\":0.0,\"end_s\":1.2,\"text\":\"hello there\"}\n{\"start_s\":1.5,\"end_s\":2.0,\"text\":\"hi\"}\n";
        let t = Transcript::from_jsonl(raw).unwrap();
        assert_eq!(t.utterances.len(), 2);
        assert_eq!(Transcript::from_jsonl(&t.to_jsonl()).unwrap(), t);
    }

    #[test]
    fn invalid_transcripts() {
        assert!(Transcript::from_jsonl("{\"start_s\":0,\"end_s\":1,\"text\":\"  \"}").is_err());
        let decreasing = "{\"start_s\":2,\"end_s\":3,\"text\":\"a\"}\n{\"start_s\":1,\"end_s\":2,\"text\":\"b\"}";
        assert!(Transcript::from_jsonl(decreasing).is_err());
        assert!(matches!(Transcript::from_jsonl("nope"), Err(TranscriptError::InvalidLine { line: 1, .. })));
    }

    #[test]
    fn sidecar_adapter() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.jsonl"), "{\"start_s\":0,\"end_s\":1,\"text\":\"b-b-ball\"}").unwrap();
        let t = SidecarAsr.transcribe(&dir.path().join("s.wav")).unwrap();
        assert_eq!(t.source, "sidecar");
        let r = analyze_transcript(&t, &Default::default(), &DisfluencyOptions::default()).unwrap();
        assert_eq!(r.sound_repetitions, 1);
    }
}
