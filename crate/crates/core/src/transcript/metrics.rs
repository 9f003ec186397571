use std::collections::HashMap;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::disfluency::strip_markers;
use super::{Transcript, TranscriptError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphFlag {
    pub utterance_index: usize,
    pub token: String,
    /// "overregularized_past" or "overregularized_plural".
    pub kind: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageMetrics {
    pub words: usize,
    pub utterances: usize,
    pub sentences: usize,
    pub mlu_approx: f64,
    pub avg_word_length: f64,
    pub avg_sentence_length: f64,
    pub morphological_flags: Vec<MorphFlag>,
}

const IRREGULAR_PAST: &[(&str, &str)] = &[
    ("break", "broke"), ("bring", "brought"), ("build", "built"), ("buy", "bought"), ("catch", "caught"),
    ("come", "came"), ("dig", "dug"), ("do", "did"), ("draw", "drew"), ("drink", "drank"), ("drive", "drove"),
    ("eat", "ate"), ("fall", "fell"), ("feel", "felt"), ("fight", "fought"), ("find", "found"), ("fly", "flew"),
    ("forget", "forgot"), ("get", "got"), ("give", "gave"), ("go", "went"), ("grow", "grew"), ("have", "had"),
    ("hide", "hid"), ("hit", "hit"), ("hold", "held"), ("hurt", "hurt"), ("keep", "kept"), ("know", "knew"),
    ("leave", "left"), ("lose", "lost"), ("make", "made"), ("ride", "rode"), ("run", "ran"), ("say", "said"),
    ("see", "saw"), ("sell", "sold"), ("sing", "sang"), ("sit", "sat"), ("sleep", "slept"), ("speak", "spoke"),
    ("stand", "stood"), ("swim", "swam"), ("take", "took"), ("teach", "taught"), ("tell", "told"),
    ("think", "thought"), ("throw", "threw"), ("wake", "woke"), ("wear", "wore"), ("win", "won"),
    ("write", "wrote"),
];

const IRREGULAR_PLURAL: &[(&str, &str)] = &[
    ("child", "children"), ("foot", "feet"), ("goose", "geese"), ("man", "men"), ("mouse", "mice"),
    ("sheep", "sheep"), ("tooth", "teeth"), ("woman", "women"),
];

/// Generated forms that are ordinary English words.
const REAL_WORDS: &[&str] = &["seed", "founded", "felted"];

/// Overregularized form -> (kind, expected form).
static OVERREGULARIZED: LazyLock<HashMap<String, (&'static str, &'static str)>> = LazyLock::new(|| {
    let mut m = HashMap::new();
    for &(base, past) in IRREGULAR_PAST {
        let mut forms = vec![format!("{base}ed"), format!("{past}ed")];
        if base.ends_with('e') {
            forms.push(format!("{base}d"));
        }
        let b = base.as_bytes();
        if b.len() >= 3 && !b"aeiou".contains(&b[b.len() - 1]) && b"aeiou".contains(&b[b.len() - 2]) {
            forms.push(format!("{base}{}ed", base.chars().last().unwrap()));
        }
        for f in forms {
            if f != past && !REAL_WORDS.contains(&f.as_str()) && !IRREGULAR_PAST.iter().any(|(_, p)| *p == f) {
                m.entry(f).or_insert(("overregularized_past", past));
            }
        }
    }
    for &(sing, plural) in IRREGULAR_PLURAL {
        for f in [format!("{sing}s"), format!("{plural}s")] {
            m.entry(f).or_insert(("overregularized_plural", plural));
        }
    }
    m
});

/// Word tokens of one utterance: whitespace tokens with at least one
/// letter or digit, markers such as "[block]" or "(1.5s)" excluded.
pub fn words(text: &str) -> Vec<String> {
    strip_markers(text)
        .split_whitespace()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(str::to_string)
        .collect()
}

/// Letters and digits only; hyphens, apostrophes and punctuation are not counted.
fn word_length(w: &str) -> usize {
    w.chars().filter(|c| c.is_alphanumeric()).count()
}

fn sentence_count(text: &str) -> usize {
    strip_markers(text).split(['.', '!', '?']).filter(|s| s.chars().any(char::is_alphanumeric)).count()
}

/// Word-based metrics. Utterances without any word (only markers) are left
/// out of every denominator; a sentence also ends at each utterance end.
pub fn compute_language_metrics(transcript: &Transcript) -> Result<LanguageMetrics, TranscriptError> {
    let mut total_words = 0;
    let mut total_chars = 0;
    let mut utterances = 0;
    let mut sentences = 0;
    let mut flags = Vec::new();
    for (i, u) in transcript.utterances.iter().enumerate() {
        let ws = words(&u.text);
        if ws.is_empty() {
            continue;
        }
        utterances += 1;
        sentences += sentence_count(&u.text);
        total_words += ws.len();
        for w in &ws {
            total_chars += word_length(w);
            let bare = w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
            if let Some((kind, expected)) = OVERREGULARIZED.get(&bare) {
                flags.push(MorphFlag {
                    utterance_index: i,
                    token: bare.clone(),
                    kind: kind.to_string(),
                    expected: expected.to_string(),
                });
            }
        }
    }
    if total_words == 0 {
        return Err(TranscriptError::EmptyTranscript);
    }
    let w = total_words as f64;
    Ok(LanguageMetrics {
        words: total_words,
        utterances,
        sentences,
        mlu_approx: w / utterances as f64,
        avg_word_length: total_chars as f64 / w,
        avg_sentence_length: w / sentences as f64,
        morphological_flags: flags,
    })
}
