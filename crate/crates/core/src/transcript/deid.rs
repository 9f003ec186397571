use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::names::{GIVEN, SURNAMES, TITLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PiiCategory {
    Email,
    Phone,
    Date,
    Address,
    Name,
}

impl PiiCategory {
    /// Replacement priority: earlier categories claim text first.
    pub const ALL: [PiiCategory; 5] =
        [PiiCategory::Email, PiiCategory::Phone, PiiCategory::Date, PiiCategory::Address, PiiCategory::Name];

    pub fn placeholder(self) -> &'static str {
        match self {
            PiiCategory::Email => "[EMAIL]",
            PiiCategory::Phone => "[PHONE]",
            PiiCategory::Date => "[DATE]",
            PiiCategory::Address => "[ADDRESS]",
            PiiCategory::Name => "[NAME]",
        }
    }
}

/// One replaced span. Offsets are byte offsets into the input text; the
/// original characters are not kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replacement {
    pub span: (usize, usize),
    pub category: PiiCategory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deidentified {
    pub text: String,
    pub log: Vec<Replacement>,
}

const MONTH: &str = r"(?:January|February|March|April|May|June|July|August|September|October|November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sept|Sep|Oct|Nov|Dec)\b\.?";

static PLACEHOLDER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[(?:EMAIL|PHONE|DATE|ADDRESS|NAME)\]").unwrap());
static EMAIL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}\b").unwrap());
static PHONE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?:\+?1[\s.-]?)?(?:\(\d{3}\)\s?|\b\d{3}[\s.-])\d{3}[\s.-]\d{4}\b|\b\d{3}-\d{4}\b").unwrap()
});
static DATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"\b{MONTH}\s+\d{{1,2}}(?:st|nd|rd|th)?\b(?:,?\s+\d{{4}}\b)?|\b\d{{1,2}}(?:st|nd|rd|th)?\s+(?:of\s+)?{MONTH}(?:,?\s+\d{{4}}\b)?|\b{MONTH}\s+\d{{4}}\b|\b\d{{1,2}}[/-]\d{{1,2}}[/-](?:\d{{4}}|\d{{2}})\b|\b\d{{4}}-\d{{2}}-\d{{2}}\b"
    ))
    .unwrap()
});
static ADDRESS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"\b\d{1,6}\s+(?:[A-Z][a-z]+\s+){1,4}(?:Street|St|Avenue|Ave|Road|Rd|Boulevard|Blvd|Lane|Ln|Drive|Dr|Court|Ct|Way|Place|Pl|Circle|Cir|Parkway|Pkwy|Terrace|Trail)\b\.?(?:,?\s+(?:Apt|Apartment|Unit|Suite|Ste)\.?\s*#?\d+[A-Za-z]?\b)?",
    )
    .unwrap()
});
static CAPITALIZED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b[A-Z][a-z]+(?:-[A-Z][a-z]+)*\b").unwrap());

static GIVEN_SET: LazyLock<HashSet<&'static str>> = LazyLock::new(|| GIVEN.iter().copied().collect());
static SURNAME_SET: LazyLock<HashSet<&'static str>> = LazyLock::new(|| SURNAMES.iter().copied().collect());

fn is_given(word: &str) -> bool {
    GIVEN_SET.contains(word) || word.split('-').next().is_some_and(|w| GIVEN_SET.contains(w))
}

fn is_title(word: &str) -> bool {
    TITLES.contains(&word)
}

/// Capitalized-name spans: a lexicon given name plus up to two following
/// capitalized words, or up to two capitalized words after an honorific.
/// A lone surname is not enough.
fn name_spans(text: &str) -> Vec<(usize, usize)> {
    let toks: Vec<(usize, usize)> = CAPITALIZED.find_iter(text).map(|m| (m.start(), m.end())).collect();
    let word = |i: usize| &text[toks[i].0..toks[i].1];
    let adjacent = |i: usize| i + 1 < toks.len() && text[toks[i].1..toks[i + 1].0] == *" ";
    let mut spans = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let w = word(i);
        let start = if is_title(w) {
            let gap = &text[toks[i].1..toks.get(i + 1).map_or(toks[i].1, |t| t.0)];
            if i + 1 < toks.len() && (gap == " " || gap == ". ") && !is_title(word(i + 1)) {
                i += 1;
                Some(i)
            } else {
                None
            }
        } else if is_given(w) || (SURNAME_SET.contains(w) && i > 0 && adjacent(i - 1) && is_given(word(i - 1))) {
            Some(i)
        } else {
            None
        };
        let Some(first) = start else {
            i += 1;
            continue;
        };
        let mut last = first;
        while last - first < 2 && adjacent(last) && !is_title(word(last + 1)) {
            last += 1;
        }
        spans.push((toks[first].0, toks[last].1));
        i = last + 1;
    }
    spans
}

fn overlaps(claimed: &[(usize, usize)], (s, e): (usize, usize)) -> bool {
    claimed.iter().any(|&(cs, ce)| s < ce && cs < e)
}

/// Replaces phone numbers, emails, street addresses, calendar dates and
/// lexicon names with placeholders. Existing placeholders are left alone,
/// so applying it twice changes nothing more.
pub fn deidentify(text: &str) -> Deidentified {
    let mut claimed: Vec<(usize, usize)> = PLACEHOLDER.find_iter(text).map(|m| (m.start(), m.end())).collect();
    let mut log = Vec::new();
    for category in PiiCategory::ALL {
        let spans: Vec<(usize, usize)> = match category {
            PiiCategory::Email => EMAIL.find_iter(text).map(|m| (m.start(), m.end())).collect(),
            PiiCategory::Phone => PHONE.find_iter(text).map(|m| (m.start(), m.end())).collect(),
            PiiCategory::Date => DATE.find_iter(text).map(|m| (m.start(), m.end())).collect(),
            PiiCategory::Address => ADDRESS.find_iter(text).map(|m| (m.start(), m.end())).collect(),
            PiiCategory::Name => name_spans(text),
        };
        for span in spans {
            if !overlaps(&claimed, span) {
                claimed.push(span);
                log.push(Replacement { span, category });
            }
        }
    }
    log.sort_by_key(|r| r.span);
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for r in &log {
        out.push_str(&text[cursor..r.span.0]);
        out.push_str(r.category.placeholder());
        cursor = r.span.1;
    }
    out.push_str(&text[cursor..]);
    Deidentified { text: out, log }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean(t: &str) -> String {
        deidentify(t).text
    }

    #[test]
    fn basic_categories() {
        assert_eq!(clean("Call 555-123-4567"), "Call [PHONE]");
        assert_eq!(clean("j.doe@example.com on March 3, 2025"), "[EMAIL] on [DATE]");
        assert_eq!(clean("We live at 42 Maple Grove Lane, Apt 3."), "We live at [ADDRESS].");
        assert_eq!(clean("Maria Lopez came with Dr. Patel."), "[NAME] came with Dr. [NAME].");
    }

    #[test]
    fn no_pii_is_unchanged() {
        let d = deidentify("the big dog ran to the park. Green is nice.");
        assert_eq!(d.text, "the big dog ran to the park. Green is nice.");
        assert!(d.log.is_empty());
    }

    #[test]
    fn lone_surname_or_month_word_kept() {
        assert_eq!(clean("Brown bears sleep in May."), "Brown bears sleep in May.");
    }

    #[test]
    fn phone_variants_and_dates() {
        assert_eq!(clean("(555) 987-6543 or 555.987.6543 or +1 555 987 6543"), "[PHONE] or [PHONE] or [PHONE]");
        assert_eq!(clean("seen 03/14/2025 and 2025-01-06, then 5th of June"), "seen [DATE] and [DATE], then [DATE]");
    }

    #[test]
    fn log_spans_point_into_input() {
        let input = "Email ana@x.org, phone 555-0100.";
        let d = deidentify(input);
        assert_eq!(d.log.len(), 2);
        assert_eq!(&input[d.log[0].span.0..d.log[0].span.1], "ana@x.org");
        assert_eq!(d.log[1].category, PiiCategory::Phone);
    }

    #[test]
    fn idempotent_on_samples() {
        for s in ["Maria Maria Maria Maria", "Mr. Dr. Smith", "a@b.co@foo.com", "21 555-123-4567", "5 March 3, 2025"] {
            let once = clean(s);
            assert_eq!(clean(&once), once, "{s}");
        }
    }
}
