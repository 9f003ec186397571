//! Rule-based extraction of batch parameters from a free-text request.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::batch::{BatchSpec, Distribution, InputMethod};
use super::pseudonym::BACKGROUNDS;
use super::{OrchestratorError, MAX_DISORDERS};
use crate::case_model::{DisorderType, GradeLevel, Severity};
use crate::util::normalize_words;

/// Fallbacks for fields the text does not mention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlDefaults {
    pub count: usize,
    pub disorders: Vec<DisorderType>,
    pub grades: Vec<GradeLevel>,
}

impl Default for NlDefaults {
    fn default() -> Self {
        NlDefaults { count: 1, disorders: vec![DisorderType::Articulation], grades: vec![GradeLevel::grade(2).unwrap()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedRequest {
    pub spec: BatchSpec,
    pub warnings: Vec<String>,
}

const UNITS: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
];
const TENS: [&str; 8] = ["twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];
const ORDINALS: [&str; 12] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth", "eleventh",
    "twelfth",
];

const DISORDER_LEXICON: &[(&str, DisorderType)] = &[
    ("childhood apraxia of speech", DisorderType::ChildhoodApraxia),
    ("apraxia of speech", DisorderType::ChildhoodApraxia),
    ("apraxia", DisorderType::ChildhoodApraxia),
    ("cas", DisorderType::ChildhoodApraxia),
    ("mixed receptive expressive language", DisorderType::LanguageGeneral),
    ("receptive expressive language", DisorderType::LanguageGeneral),
    ("mixed language", DisorderType::LanguageGeneral),
    ("expressive language", DisorderType::ExpressiveLanguage),
    ("expressive", DisorderType::ExpressiveLanguage),
    ("receptive language", DisorderType::ReceptiveLanguage),
    ("receptive", DisorderType::ReceptiveLanguage),
    ("pragmatic language", DisorderType::PragmaticLanguage),
    ("pragmatics", DisorderType::PragmaticLanguage),
    ("pragmatic", DisorderType::PragmaticLanguage),
    ("social communication", DisorderType::SocialCommunication),
    ("speech sound", DisorderType::SpeechSoundGeneral),
    ("phonological", DisorderType::Phonological),
    ("phonology", DisorderType::Phonological),
    ("articulation", DisorderType::Articulation),
    ("artic", DisorderType::Articulation),
    ("lisp", DisorderType::Articulation),
    ("stuttering", DisorderType::Fluency),
    ("stutter", DisorderType::Fluency),
    ("fluency", DisorderType::Fluency),
    ("voice", DisorderType::Voice),
    ("vocal", DisorderType::Voice),
    ("language", DisorderType::LanguageGeneral),
];

const BACKGROUND_LEXICON: &[(&str, &str)] = &[
    ("hispanic", "Hispanic/Latino"),
    ("latino", "Hispanic/Latino"),
    ("latina", "Hispanic/Latino"),
    ("latinx", "Hispanic/Latino"),
    ("african american", "African American"),
    ("black", "African American"),
    ("asian american", "Asian American"),
    ("asian", "Asian American"),
    ("middle eastern", "Middle Eastern"),
    ("arab", "Middle Eastern"),
];

/// Words that may sit between two disorder names without splitting them.
const FILLER: [&str; 5] = ["disorder", "disorders", "impairment", "impairments", "delay"];

struct Tokens {
    words: Vec<String>,
    used: Vec<bool>,
}

impl Tokens {
    fn new(text: &str) -> Self {
        let words: Vec<String> = normalize_words(text).split(' ').filter(|w| !w.is_empty()).map(str::to_string).collect();
        let used = vec![false; words.len()];
        Tokens { words, used }
    }

    fn get(&self, i: usize) -> Option<&str> {
        self.words.get(i).map(String::as_str)
    }

    /// Length in tokens of `phrase` at position `i`, if it matches there.
    fn phrase_at(&self, i: usize, phrase: &str) -> Option<usize> {
        let parts: Vec<&str> = phrase.split(' ').collect();
        let fits = parts.iter().enumerate().all(|(k, p)| self.get(i + k) == Some(p) && !self.used[i + k]);
        fits.then_some(parts.len())
    }

    fn mark(&mut self, i: usize, len: usize) {
        for k in i..i + len {
            self.used[k] = true;
        }
    }
}

fn grade_number(word: &str) -> Option<u8> {
    if let Some(p) = ORDINALS.iter().position(|o| *o == word) {
        return Some(p as u8 + 1);
    }
    let digits: String = word.chars().take_while(char::is_ascii_digit).collect();
    let rest = &word[digits.len()..];
    if digits.is_empty() || !matches!(rest, "" | "st" | "nd" | "rd" | "th") {
        return None;
    }
    digits.parse().ok().filter(|n| (1..=12).contains(n))
}

fn grade_range(lo: GradeLevel, hi: GradeLevel) -> Vec<GradeLevel> {
    GradeLevel::all().filter(|g| *g >= lo && *g <= hi).collect()
}

fn extract_grades(t: &mut Tokens) -> Vec<GradeLevel> {
    let g = |n| GradeLevel::grade(n).unwrap();
    let mut out = Vec::new();
    let bands: [(&str, Vec<GradeLevel>); 9] = [
        ("pre kindergarten", vec![GradeLevel::PRE_K]),
        ("pre k", vec![GradeLevel::PRE_K]),
        ("prek", vec![GradeLevel::PRE_K]),
        ("preschool", vec![GradeLevel::PRE_K]),
        ("kindergarten", vec![GradeLevel::KINDERGARTEN]),
        ("high school", grade_range(g(9), g(12))),
        ("middle school", grade_range(g(6), g(8))),
        ("elementary", grade_range(GradeLevel::KINDERGARTEN, g(5))),
        ("preschoolers", vec![GradeLevel::PRE_K]),
    ];
    for i in 0..t.words.len() {
        for (phrase, grades) in &bands {
            if let Some(len) = t.phrase_at(i, phrase) {
                t.mark(i, len);
                out.extend(grades.iter().copied());
            }
        }
    }
    for i in 0..t.words.len() {
        if t.used[i] {
            continue;
        }
        let w = t.words[i].clone();
        let next = t.get(i + 1).map(str::to_string);
        match (w.as_str(), next.as_deref()) {
            // grades 3 to 5, grade 3 5, grades three through five
            ("grade" | "grades", Some(n)) if grade_number(n).is_some() || UNITS.contains(&n) => {
                let first = grade_number(n).or_else(|| UNITS.iter().position(|u| *u == n).map(|p| p as u8));
                let Some(lo) = first.and_then(GradeLevel::grade) else { continue };
                let mut len = 2;
                let mut hi = lo;
                let mut j = i + 2;
                if matches!(t.get(j), Some("to" | "through" | "thru")) {
                    j += 1;
                }
                if let Some(h) = t.get(j).and_then(|x| {
                    grade_number(x).or_else(|| UNITS.iter().position(|u| *u == x).map(|p| p as u8))
                }) {
                    if let Some(h) = GradeLevel::grade(h).filter(|h| *h > lo) {
                        hi = h;
                        len = j + 1 - i;
                    }
                }
                t.mark(i, len);
                out.extend(grade_range(lo, hi));
            }
            (n, Some("grade" | "grader" | "graders" | "grades")) if grade_number(n).is_some() => {
                let is_ordinal = !n.chars().all(|c| c.is_ascii_digit());
                if is_ordinal {
                    out.push(g(grade_number(n).unwrap()));
                    t.mark(i, 2);
                }
            }
            ("k", _) => {
                out.push(GradeLevel::KINDERGARTEN);
                t.mark(i, 1);
            }
            _ => {}
        }
    }
    let mut seen = BTreeSet::new();
    out.retain(|g| seen.insert(*g));
    out
}

fn extract_disorders(t: &mut Tokens) -> Vec<Vec<DisorderType>> {
    // (start, end-exclusive, disorder) in text order.
    let mut hits: Vec<(usize, usize, DisorderType)> = Vec::new();
    let mut i = 0;
    while i < t.words.len() {
        let hit = DISORDER_LEXICON.iter().find_map(|(p, d)| t.phrase_at(i, p).map(|len| (len, *d)));
        match hit {
            Some((len, d)) => {
                t.mark(i, len);
                hits.push((i, i + len, d));
                i += len;
            }
            None => i += 1,
        }
    }
    let combined = t.words.iter().any(|w| matches!(w.as_str(), "combined" | "comorbid" | "co" | "cooccurring"));
    let mut sets: Vec<Vec<DisorderType>> = Vec::new();
    let mut prev_end: Option<usize> = None;
    for (start, end, d) in hits {
        let joined = prev_end.is_some_and(|pe| {
            let gap: Vec<&str> =
                t.words[pe..start].iter().map(String::as_str).filter(|w| !FILLER.contains(w)).collect();
            match gap.as_slice() {
                [] | ["with"] | ["plus"] => true,
                ["and"] => combined,
                _ => false,
            }
        });
        match sets.last_mut() {
            Some(last) if joined && last.len() < MAX_DISORDERS => {
                if !last.contains(&d) {
                    last.push(d);
                }
            }
            _ => sets.push(vec![d]),
        }
        prev_end = Some(end);
    }
    let mut seen = BTreeSet::new();
    sets.retain(|s| seen.insert(s.clone()));
    sets
}

fn number_word(t: &Tokens, i: usize) -> Option<(usize, usize)> {
    let w = t.get(i)?;
    let at = |k: usize| t.get(i + k).filter(|_| !t.used[i + k]);
    if w == "hundred" {
        return Some((100, 1));
    }
    if matches!(w, "one" | "a") && at(1) == Some("hundred") {
        return Some((100, 2));
    }
    if let Some(p) = TENS.iter().position(|x| *x == w) {
        let base = 20 + 10 * p;
        if let Some(u) = at(1).and_then(|n| UNITS[1..10].iter().position(|x| *x == n)) {
            return Some((base + u + 1, 2));
        }
        return Some((base, 1));
    }
    if w == "a" {
        return None;
    }
    UNITS.iter().position(|x| *x == w).map(|n| (n, 1))
}

fn extract_count(t: &mut Tokens) -> Option<usize> {
    for i in 0..t.words.len() {
        if t.used[i] {
            continue;
        }
        let w = &t.words[i];
        let value = if w.chars().all(|c| c.is_ascii_digit()) {
            w.parse::<usize>().ok().map(|n| (n, 1))
        } else {
            number_word(t, i)
        };
        if let Some((n, len)) = value {
            t.mark(i, len);
            return Some(n);
        }
    }
    None
}

fn extract_named<T: Clone + PartialEq>(t: &mut Tokens, lexicon: &[(&str, T)]) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for i in 0..t.words.len() {
        if let Some((len, v)) = lexicon.iter().find_map(|(p, v)| t.phrase_at(i, p).map(|len| (len, v.clone()))) {
            t.mark(i, len);
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// Reads count, disorders, grades, severities, backgrounds and genders.
/// Fields the text leaves out take `defaults` and add a warning.
pub fn parse_natural_language_request(text: &str, defaults: &NlDefaults) -> Result<ParsedRequest, OrchestratorError> {
    let mut t = Tokens::new(text);
    let grades = extract_grades(&mut t);
    let disorders = extract_disorders(&mut t);
    let severities = extract_named(
        &mut t,
        &[("mild", Severity::Mild), ("moderate", Severity::Moderate), ("severe", Severity::Severe)],
    );
    let backgrounds: Vec<String> = if t.words.iter().any(|w| w == "diverse") {
        BACKGROUNDS.iter().map(|s| s.to_string()).collect()
    } else {
        extract_named(&mut t, BACKGROUND_LEXICON).into_iter().map(str::to_string).collect()
    };
    let genders: Vec<String> = extract_named(
        &mut t,
        &[("girls", "Female"), ("girl", "Female"), ("female", "Female"), ("boys", "Male"), ("boy", "Male"), ("male", "Male")],
    )
    .into_iter()
    .map(str::to_string)
    .collect();
    let count = extract_count(&mut t);
    if count.is_none() && disorders.is_empty() {
        return Err(OrchestratorError::UnparseableRequest(format!("no count or disorder found in {text:?}")));
    }

    let mut warnings = Vec::new();
    let count = count.unwrap_or_else(|| {
        warnings.push(format!("no case count found; using {}", defaults.count));
        defaults.count
    });
    let disorders = if disorders.is_empty() {
        warnings.push(format!("no disorder found; using {}", super::batch::DistKey::to_key(&defaults.disorders)));
        vec![defaults.disorders.clone()]
    } else {
        disorders
    };
    let grades = if grades.is_empty() {
        let names: Vec<String> = defaults.grades.iter().map(|g| g.display_name()).collect();
        warnings.push(format!("no grade found; using {}", names.join(", ")));
        defaults.grades.clone()
    } else {
        grades
    };

    let mut spec = BatchSpec::new(count);
    spec.disorders = Distribution::uniform(disorders);
    spec.grades = Distribution::uniform(grades);
    spec.severities = Distribution::uniform(severities);
    spec.backgrounds = Distribution::uniform(backgrounds);
    spec.genders = Distribution::uniform(genders);
    spec.input_method = InputMethod::NaturalLanguage;
    spec.validate()?;
    Ok(ParsedRequest { spec, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ParsedRequest {
        parse_natural_language_request(text, &NlDefaults::default()).unwrap()
    }

    #[test]
    fn count_disorder_grade() {
        let p = parse("generate 5 second-grade articulation cases");
        assert_eq!(p.spec.count, 5);
        assert_eq!(p.spec.disorders.0[0].value, vec![DisorderType::Articulation]);
        assert_eq!(p.spec.grades.values(), vec![GradeLevel::grade(2).unwrap()]);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn high_school_band_is_uniform() {
        let p = parse("ten fluency cases for high school");
        assert_eq!(p.spec.count, 10);
        assert_eq!(p.spec.grades.values(), (9..=12).map(|n| GradeLevel::grade(n).unwrap()).collect::<Vec<_>>());
        assert!(p.spec.grades.0.iter().all(|w| (w.weight - 0.25).abs() < 1e-12));
    }

    #[test]
    fn empty_and_vague_are_unparseable() {
        let d = NlDefaults::default();
        assert_eq!(parse_natural_language_request("", &d).unwrap_err().code(), "unparseable_request");
        assert_eq!(parse_natural_language_request("make some cases", &d).unwrap_err().code(), "unparseable_request");
    }

    #[test]
    fn defaults_warn() {
        let p = parse("stuttering cases please");
        assert_eq!(p.spec.count, 1);
        assert_eq!(p.warnings.len(), 2);
    }

    #[test]
    fn pairs_and_numbers() {
        let p = parse("twenty-five kindergarten phonological with expressive language cases");
        assert_eq!(p.spec.count, 25);
        assert_eq!(p.spec.disorders.0.len(), 1);
        assert_eq!(p.spec.disorders.0[0].value, vec![DisorderType::Phonological, DisorderType::ExpressiveLanguage]);
        assert_eq!(p.spec.grades.values(), vec![GradeLevel::KINDERGARTEN]);
    }

    #[test]
    fn grade_numbers_are_not_counts() {
        let p = parse("voice cases for grade 3");
        assert_eq!(p.spec.count, 1);
        assert_eq!(p.spec.grades.values(), vec![GradeLevel::grade(3).unwrap()]);
        let p = parse("12 fluency or voice cases, grades 3 to 5, mild or severe, Hispanic girls");
        assert_eq!(p.spec.count, 12);
        assert_eq!(p.spec.disorders.0.len(), 2);
        assert_eq!(p.spec.grades.values().len(), 3);
        assert_eq!(p.spec.severities.0.len(), 2);
        assert_eq!(p.spec.backgrounds.0[0].value, "Hispanic/Latino");
        assert_eq!(p.spec.genders.0[0].value, "Female");
    }
}
