//! SMART-goal and session-note parsers.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::SessionNote;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    Percentage { value: f64 },
    Trials { achieved: u32, total: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmartGoalParse {
    pub time_bound: bool,
    pub student_named: bool,
    pub has_condition: bool,
    /// First criterion in text order.
    pub criterion: Option<Criterion>,
    /// Every criterion found, in text order.
    pub criteria: Vec<Criterion>,
    pub has_measurement: bool,
}

impl SmartGoalParse {
    pub fn is_smart(&self) -> bool {
        self.time_bound
            && self.student_named
            && self.has_condition
            && self.criterion.is_some()
            && self.has_measurement
    }
}

static TIME_BOUND: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bbefore\s+or\s+by\s+(?:the\s+)?next\s+annual\s+ARD\b").unwrap());
static CONDITION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bgiven\b").unwrap());
static MEASUREMENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bas\s+measured\s+by\b").unwrap());
static NAMED_SUBJECT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b([A-Z][\p{L}'-]+(?:\s+[A-Z][\p{L}'-]+)*)\s+will\b").unwrap());
static PERCENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(\d{1,3}(?:\.\d+)?)\s*%").unwrap());
static OUT_OF: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(\d+)\s+out\s+of\s+(\d+)\b").unwrap());
static SLASH_FRACTION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(\d+)\s*/\s*(\d+)(/\d)?").unwrap());
static SLASH_TRIALS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(\d+)\s*/\s*(\d+)\s+(?:trials|opportunities|attempts)\b").unwrap()
});
static GOAL_REF: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\bgoals?\s*#?\s*(\d+(?:\s*(?:,|&|and|/)\s*#?\d+)*)").unwrap()
});
static DIGITS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+").unwrap());

/// Words that may start a "... will" clause without naming the student.
const GENERIC_SUBJECTS: [&str; 9] = [
    "Student", "The", "He", "She", "They", "Child", "This", "Students", "Learner",
];

fn named_subject(text: &str) -> bool {
    NAMED_SUBJECT.captures_iter(text).any(|c| {
        let first = c[1].split_whitespace().next().unwrap_or("");
        !GENERIC_SUBJECTS.contains(&first)
    })
}

pub fn parse_smart_goal(text: &str) -> SmartGoalParse {
    let mut found: Vec<(usize, Criterion)> = Vec::new();
    for c in PERCENT.captures_iter(text) {
        if let Ok(value) = c[1].parse::<f64>() {
            found.push((c.get(0).unwrap().start(), Criterion::Percentage { value }));
        }
    }
    for re in [&*OUT_OF, &*SLASH_TRIALS] {
        for c in re.captures_iter(text) {
            if let (Ok(achieved), Ok(total)) = (c[1].parse(), c[2].parse()) {
                found.push((c.get(0).unwrap().start(), Criterion::Trials { achieved, total }));
            }
        }
    }
    found.sort_by_key(|(at, _)| *at);
    let criteria: Vec<Criterion> = found.into_iter().map(|(_, c)| c).collect();
    SmartGoalParse {
        time_bound: TIME_BOUND.is_match(text),
        student_named: named_subject(text),
        has_condition: CONDITION.is_match(text),
        criterion: criteria.first().copied(),
        criteria,
        has_measurement: MEASUREMENT.is_match(text),
    }
}

/// Objective measurements extracted from a session note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveData {
    pub percentages: Vec<f64>,
    pub trial_fractions: Vec<(u32, u32)>,
    pub goal_refs: Vec<i64>,
    pub has_objective_data: bool,
}

/// Goal numbers referenced by free text ("Goal 1", "Goals 1 and 2").
pub fn goal_references(text: &str) -> Vec<i64> {
    let mut out = Vec::new();
    for c in GOAL_REF.captures_iter(text) {
        for d in DIGITS.find_iter(&c[1]) {
            if let Ok(n) = d.as_str().parse::<i64>() {
                if !out.contains(&n) {
                    out.push(n);
                }
            }
        }
    }
    out
}

pub fn parse_session_data(note: &SessionNote) -> ObjectiveData {
    let body = note.note.as_str();
    let percentages: Vec<f64> = PERCENT
        .captures_iter(body)
        .filter_map(|c| c[1].parse().ok())
        .collect();

    let mut fractions: Vec<(usize, (u32, u32))> = Vec::new();
    for c in OUT_OF.captures_iter(body) {
        if let (Ok(a), Ok(b)) = (c[1].parse(), c[2].parse()) {
            fractions.push((c.get(0).unwrap().start(), (a, b)));
        }
    }
    for c in SLASH_FRACTION.captures_iter(body) {
        // a third component means a calendar date such as 1/15/2025
        if c.get(3).is_some() {
            continue;
        }
        if let (Ok(a), Ok(b)) = (c[1].parse(), c[2].parse()) {
            fractions.push((c.get(0).unwrap().start(), (a, b)));
        }
    }
    fractions.sort_by_key(|(at, _)| *at);
    let trial_fractions: Vec<(u32, u32)> = fractions.into_iter().map(|(_, f)| f).collect();

    let mut goal_refs = goal_references(&note.goal_addressed);
    for n in goal_references(body) {
        if !goal_refs.contains(&n) {
            goal_refs.push(n);
        }
    }
    ObjectiveData {
        has_objective_data: !percentages.is_empty() || !trial_fractions.is_empty(),
        percentages,
        trial_fractions,
        goal_refs,
    }
}
