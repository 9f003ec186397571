use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::disfluency::strip_markers;
use super::Transcript;

/// Marks a token transcribed as a distorted production, e.g. "sun*".
pub const DISTORTION_MARKER: char = '*';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Substitution,
    Omission,
    Distortion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticulationCandidate {
    pub utterance_index: usize,
    pub produced: String,
    pub target: String,
    pub kind: CandidateKind,
    /// "w/r" for a substitution (produced/target), the missing letter for an
    /// omission, empty for a distortion.
    pub detail: String,
}

/// Levenshtein distance over chars.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(ca != cb)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Single replace or deletion turning `target` into `produced`.
fn single_edit(produced: &[char], target: &[char]) -> Option<(CandidateKind, String)> {
    if produced.len() == target.len() {
        let diffs: Vec<usize> = (0..target.len()).filter(|&i| produced[i] != target[i]).collect();
        (diffs.len() == 1).then(|| (CandidateKind::Substitution, format!("{}/{}", produced[diffs[0]], target[diffs[0]])))
    } else if produced.len() + 1 == target.len() {
        let i = (0..produced.len()).find(|&i| produced[i] != target[i]).unwrap_or(produced.len());
        (produced[i..] == target[i + 1..]).then(|| (CandidateKind::Omission, target[i].to_string()))
    } else {
        None
    }
}

fn produced_form(token: &str) -> (String, bool) {
    let marked = token.contains(DISTORTION_MARKER);
    // Part-word repetitions ("b-b-ball") are judged on the completed word.
    let last = token.rsplit('-').next().unwrap_or(token);
    let word = last.chars().filter(|c| c.is_alphabetic() || *c == '\'').collect::<String>().to_lowercase();
    (word, marked)
}

/// Aligns each produced token with the expected spellings in `lexicon`
/// (expected word -> expected spelling). Exact matches yield nothing unless
/// marked as distorted; other tokens are matched at edit distance one.
pub fn detect_articulation_candidates(
    transcript: &Transcript,
    lexicon: &BTreeMap<String, String>,
) -> Vec<ArticulationCandidate> {
    let targets: Vec<(String, Vec<char>)> = lexicon
        .values()
        .map(|s| s.to_lowercase())
        .map(|s| {
            let c = s.chars().collect();
            (s, c)
        })
        .collect();
    let mut out = Vec::new();
    for (i, u) in transcript.utterances.iter().enumerate() {
        for tok in strip_markers(&u.text).split_whitespace() {
            let (produced, marked) = produced_form(tok);
            if produced.is_empty() {
                continue;
            }
            let push = |out: &mut Vec<ArticulationCandidate>, target: &str, kind, detail: String| {
                out.push(ArticulationCandidate {
                    utterance_index: i,
                    produced: produced.clone(),
                    target: target.to_string(),
                    kind,
                    detail,
                })
            };
            if let Some((t, _)) = targets.iter().find(|(t, _)| *t == produced) {
                if marked {
                    push(&mut out, t, CandidateKind::Distortion, String::new());
                }
                continue;
            }
            let pc: Vec<char> = produced.chars().collect();
            if let Some((t, kind, detail)) =
                targets.iter().find_map(|(t, tc)| single_edit(&pc, tc).map(|(k, d)| (t, k, d)))
            {
                if marked {
                    push(&mut out, t, CandidateKind::Distortion, String::new());
                } else {
                    push(&mut out, t, kind, detail);
                }
            }
        }
    }
    out
}
