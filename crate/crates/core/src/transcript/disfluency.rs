use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::Transcript;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisfluencyOptions {
    /// Pauses longer than this many seconds count as blocks.
    pub pause_threshold_s: f64,
    /// Also count silent gaps between consecutive utterances.
    pub count_timestamp_gaps: bool,
}

impl Default for DisfluencyOptions {
    fn default() -> Self {
        DisfluencyOptions { pause_threshold_s: 1.0, count_timestamp_gaps: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisfluencyCounts {
    pub sound_repetitions: usize,
    pub syllable_repetitions: usize,
    pub prolongations: usize,
    pub blocks: usize,
    /// Whitespace tokens seen, including markers.
    pub tokens: usize,
}

// "(1.5s)", "( 2 sec )", "(1.25 seconds)"
static TIMED_PAUSE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\(\s*(\d+(?:\.\d+)?)\s*(?:s|sec|secs|seconds?)\s*\)").unwrap());
static UNTIMED_MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\[block\]|\(\s*(?:\.\.\.|…)\s*\)").unwrap());

/// Text with block and pause markers replaced by spaces.
pub(super) fn strip_markers(text: &str) -> String {
    UNTIMED_MARKER.replace_all(&TIMED_PAUSE.replace_all(text, " "), " ").into_owned()
}

#[derive(Debug, PartialEq, Eq)]
enum Repetition {
    Sound,
    Syllable,
}

fn core_word(token: &str) -> String {
    token.trim_matches(|c: char| !c.is_alphanumeric() && c != '-').to_lowercase()
}

/// "b-b-ball" is a sound repetition, "ba-ba-ball" a syllable repetition:
/// every piece before the last is the same, and the last piece continues it.
fn repetition(word: &str) -> Option<Repetition> {
    let parts: Vec<&str> = word.split('-').collect();
    let (last, pieces) = parts.split_last()?;
    let first = pieces.first()?;
    if first.is_empty() || !first.chars().all(char::is_alphabetic) || !pieces.iter().all(|p| p == first) {
        return None;
    }
    if last.len() <= first.len() || !last.starts_with(first) || !last.chars().all(char::is_alphabetic) {
        return None;
    }
    Some(if first.chars().count() == 1 { Repetition::Sound } else { Repetition::Syllable })
}

fn is_prolongation(word: &str) -> bool {
    let mut run = 0;
    let mut prev = None;
    for c in word.chars() {
        if c.is_alphabetic() && Some(c) == prev {
            run += 1;
            if run >= 3 {
                return true;
            }
        } else {
            run = 1;
            prev = Some(c);
        }
    }
    false
}

fn marker_blocks(text: &str, threshold: f64) -> usize {
    let timed =
        TIMED_PAUSE.captures_iter(text).filter(|c| c[1].parse::<f64>().is_ok_and(|s| s > threshold)).count();
    timed + UNTIMED_MARKER.find_iter(text).count()
}

pub fn detect_disfluencies(transcript: &Transcript, opts: &DisfluencyOptions) -> DisfluencyCounts {
    let mut out = DisfluencyCounts::default();
    for (i, u) in transcript.utterances.iter().enumerate() {
        out.blocks += marker_blocks(&u.text, opts.pause_threshold_s);
        if opts.count_timestamp_gaps && i > 0 {
            let gap = u.start_s - transcript.utterances[i - 1].end_s;
            if gap > opts.pause_threshold_s {
                out.blocks += 1;
            }
        }
        let stripped = strip_markers(&u.text);
        out.tokens += u.text.split_whitespace().count();
        for tok in stripped.split_whitespace() {
            let w = core_word(tok);
            match repetition(&w) {
                Some(Repetition::Sound) => out.sound_repetitions += 1,
                Some(Repetition::Syllable) => out.syllable_repetitions += 1,
                None => {}
            }
            if is_prolongation(&w) {
                out.prolongations += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(texts: &[&str]) -> DisfluencyCounts {
        detect_disfluencies(&Transcript::from_texts(texts), &DisfluencyOptions::default())
    }

    #[test]
    fn rule_examples() {
        assert_eq!(counts(&["b-b-ball"]).sound_repetitions, 1);
        let c = counts(&["ssssun and ba-ba-ball"]);
        assert_eq!((c.prolongations, c.syllable_repetitions, c.sound_repetitions), (1, 1, 0));
    }

    #[test]
    fn compounds_are_not_repetitions() {
        let c = counts(&["a well-known to-do list, self-esteem"]);
        assert_eq!((c.sound_repetitions, c.syllable_repetitions), (0, 0));
        assert_eq!(counts(&["I see"]).prolongations, 0);
        assert_eq!(counts(&["good book"]).prolongations, 0);
    }

    #[test]
    fn block_markers_and_gaps() {
        assert_eq!(counts(&["I [block] want (...) it (…)"]).blocks, 3);
        assert_eq!(counts(&["wait (0.5s) then (1.5s) and ( 2 sec )"]).blocks, 2);
        let mut t = Transcript::from_texts(&["one", "two"]);
        t.utterances[1].start_s = 3.0;
        assert_eq!(detect_disfluencies(&t, &DisfluencyOptions::default()).blocks, 1);
        let off = DisfluencyOptions { count_timestamp_gaps: false, ..Default::default() };
        assert_eq!(detect_disfluencies(&t, &off).blocks, 0);
    }

    #[test]
    fn punctuation_around_tokens() {
        let c = counts(&["\"b-b-ball!\" said ba-ba-banana, mmmmore?"]);
        assert_eq!((c.sound_repetitions, c.syllable_repetitions, c.prolongations), (1, 1, 1));
    }
}
