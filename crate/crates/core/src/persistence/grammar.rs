use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::case_model::CaseFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrammarKind {
    DoubleSpace,
    UncapitalizedSentence,
    UnmatchedBracket,
    RepeatedWord,
    MissingTerminalPunctuation,
}

impl GrammarKind {
    pub const ALL: [GrammarKind; 5] = [
        GrammarKind::DoubleSpace,
        GrammarKind::UncapitalizedSentence,
        GrammarKind::UnmatchedBracket,
        GrammarKind::RepeatedWord,
        GrammarKind::MissingTerminalPunctuation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GrammarKind::DoubleSpace => "double_space",
            GrammarKind::UncapitalizedSentence => "uncapitalized_sentence",
            GrammarKind::UnmatchedBracket => "unmatched_bracket",
            GrammarKind::RepeatedWord => "repeated_word",
            GrammarKind::MissingTerminalPunctuation => "missing_terminal_punctuation",
        }
    }

    pub fn parse(s: &str) -> Option<GrammarKind> {
        GrammarKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// A rule hit inside one free-text field. `span` is a byte range of that field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarIssue {
    pub field_path: String,
    pub kind: GrammarKind,
    pub span: (usize, usize),
}

static DOUBLE_SPACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r" {2,}").unwrap());
// Terminal punctuation, optional closing quotes, whitespace, optional opening quotes, then a word.
static SENTENCE_START: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"([.!?])['"’”)]*\s+['"‘“(]*([a-z][A-Za-z'-]*)"#).unwrap());
static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[A-Za-z][A-Za-z']*").unwrap());
static TERMINAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"[.!?]['"’”)\]]*\s*$"#).unwrap());

/// Abbreviations whose period does not end a sentence.
const ABBREVIATIONS: &[&str] = &["e.g", "i.e", "vs", "etc", "approx", "cf", "ca", "dr", "mr", "mrs", "ms", "min", "hr"];

fn ends_with_abbreviation(before: &str) -> bool {
    let last = before.rsplit(|c: char| c.is_whitespace() || c == '(').next().unwrap_or("");
    ABBREVIATIONS.contains(&last.to_ascii_lowercase().as_str())
}

fn check_text(field_path: &str, text: &str, needs_terminal: bool, out: &mut Vec<GrammarIssue>) {
    let mut push = |kind, span| out.push(GrammarIssue { field_path: field_path.to_string(), kind, span });
    for m in DOUBLE_SPACE.find_iter(text) {
        push(GrammarKind::DoubleSpace, (m.start(), m.end()));
    }
    for c in SENTENCE_START.captures_iter(text) {
        let punct = c.get(1).unwrap();
        if punct.as_str() == "." && ends_with_abbreviation(&text[..punct.start()]) {
            continue;
        }
        let w = c.get(2).unwrap();
        push(GrammarKind::UncapitalizedSentence, (w.start(), w.end()));
    }
    let mut stack: Vec<(char, usize)> = Vec::new();
    for (i, ch) in text.char_indices() {
        match ch {
            '(' | '[' | '{' => stack.push((ch, i)),
            ')' | ']' | '}' => {
                let open = match ch {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                if stack.last().is_some_and(|(o, _)| *o == open) {
                    stack.pop();
                } else {
                    push(GrammarKind::UnmatchedBracket, (i, i + 1));
                }
            }
            _ => {}
        }
    }
    for (_, i) in stack {
        push(GrammarKind::UnmatchedBracket, (i, i + 1));
    }
    let words: Vec<regex::Match> = WORD.find_iter(text).collect();
    for pair in words.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let gap = &text[a.end()..b.start()];
        if !gap.is_empty() && gap.chars().all(char::is_whitespace) && a.as_str().eq_ignore_ascii_case(b.as_str()) {
            push(GrammarKind::RepeatedWord, (a.start(), b.end()));
        }
    }
    let trimmed_len = text.trim_end().len();
    if needs_terminal && trimmed_len > 0 && !TERMINAL.is_match(text) {
        push(GrammarKind::MissingTerminalPunctuation, (trimmed_len, trimmed_len));
    }
}

/// Applies the five rule kinds to the case's prose fields. Goal titles and
/// assessment domains are labels, so they skip the terminal punctuation rule.
pub fn grammar_check(case: &CaseFile) -> Vec<GrammarIssue> {
    let mut out = Vec::new();
    check_text("background", &case.background, true, &mut out);
    for (i, a) in case.assessment_results.iter().enumerate() {
        check_text(&format!("assessment_results[{i}].domain"), &a.domain, false, &mut out);
    }
    for (i, g) in case.annual_goals.iter().enumerate() {
        check_text(&format!("annual_goals[{i}].goal_brief"), &g.goal_brief, false, &mut out);
        check_text(&format!("annual_goals[{i}].goal_annual"), &g.goal_annual, true, &mut out);
    }
    for (i, n) in case.session_notes.iter().enumerate() {
        check_text(&format!("session_notes[{i}].note"), &n.note, true, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<(GrammarKind, &str)> {
        let mut out = Vec::new();
        check_text("f", text, true, &mut out);
        out.into_iter().map(|i| (i.kind, &text[i.span.0..i.span.1])).collect()
    }

    #[test]
    fn each_rule() {
        assert_eq!(kinds("the  cat."), vec![(GrammarKind::DoubleSpace, "  ")]);
        assert_eq!(kinds("he went. she stayed."), vec![(GrammarKind::UncapitalizedSentence, "she")]);
        assert_eq!(kinds("a (b] c."), vec![(GrammarKind::UnmatchedBracket, "]"), (GrammarKind::UnmatchedBracket, "(")]);
        assert_eq!(kinds("the the cat."), vec![(GrammarKind::RepeatedWord, "the the")]);
        assert_eq!(kinds("no stop"), vec![(GrammarKind::MissingTerminalPunctuation, "")]);
    }

    #[test]
    fn abbreviations_and_quotes() {
        assert!(kinds("Used cards (e.g. car, star). 'She said.' It ended.").is_empty());
        assert!(kinds("Met with Dr. smith today.").is_empty());
        assert_eq!(kinds("Done. 'then it rained.'"), vec![(GrammarKind::UncapitalizedSentence, "then")]);
    }

    #[test]
    fn separated_repeats_are_fine() {
        assert!(kinds("sound, sound again.").is_empty());
    }
}
