use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::parse::goal_references;
use super::{
    check_age_grade, check_percentile_consistency, check_score_severity, CaseFile, GradeLevel,
    Setting, Severity, MIN_BACKGROUND_CHARS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingCode {
    MissingField,
    GoalsCountOutOfRange,
    SessionNotesCountMismatch,
    InvalidGrade,
    InvalidSeverity,
    InvalidSetting,
    InvalidDate,
    PercentileOutOfRange,
    DuplicateGoalNumber,
    NonContiguousGoalNumbers,
    DanglingGoalReference,
    MalformedGoalReference,
    AgeOutOfDomain,
    // warnings
    BackgroundTooShort,
    AgeGradeMismatch,
    ScoreSeverityMismatch,
    PercentileInconsistent,
    NoteSegmentsMissing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub field_path: String,
    pub code: FindingCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_error(&self, code: FindingCode) -> bool {
        self.errors.iter().any(|f| f.code == code)
    }

    pub fn has_warning(&self, code: FindingCode) -> bool {
        self.warnings.iter().any(|f| f.code == code)
    }

    fn error(&mut self, path: impl Into<String>, code: FindingCode, message: impl Into<String>) {
        self.errors.push(Finding { field_path: path.into(), code, message: message.into() });
    }

    fn warn(&mut self, path: impl Into<String>, code: FindingCode, message: impl Into<String>) {
        self.warnings.push(Finding { field_path: path.into(), code, message: message.into() });
    }

    fn require_text(&mut self, path: String, value: &str) -> bool {
        if value.trim().is_empty() {
            self.error(path, FindingCode::MissingField, "required field is missing or empty");
            false
        } else {
            true
        }
    }
}

/// Reports every missing, empty or malformed field of a case.
///
/// Errors mark structural problems; warnings mark soft rules (background
/// length, age/grade fit, score consistency) that still leave the case usable.
pub fn validate_case(case: &CaseFile) -> ValidationReport {
    let mut r = ValidationReport::default();

    r.require_text("name".into(), &case.name);
    r.require_text("gender".into(), &case.gender);

    let grade = if r.require_text("grade".into(), &case.grade) {
        let parsed = case.grade.parse::<GradeLevel>().ok();
        if parsed.is_none() {
            r.error("grade", FindingCode::InvalidGrade, format!("unrecognised grade {:?}", case.grade));
        }
        parsed
    } else {
        None
    };

    match case.age {
        None => r.error("age", FindingCode::MissingField, "required field is missing or empty"),
        Some(age) => {
            if let Some(grade) = grade {
                match check_age_grade(age, grade) {
                    Err(e) => r.error("age", FindingCode::AgeOutOfDomain, e.to_string()),
                    Ok(false) => {
                        let (lo, hi) = grade.age_range();
                        r.warn(
                            "age",
                            FindingCode::AgeGradeMismatch,
                            format!("age {age} outside {lo}-{hi} expected for {grade}"),
                        )
                    }
                    Ok(true) => {}
                }
            } else if !(3..=22).contains(&age) {
                r.error("age", FindingCode::AgeOutOfDomain, format!("age {age} outside 3-22"));
            }
        }
    }

    if r.require_text("background".into(), &case.background) {
        let len = case.background.chars().count();
        if len < MIN_BACKGROUND_CHARS {
            r.warn(
                "background",
                FindingCode::BackgroundTooShort,
                format!("background has {len} characters; at least {MIN_BACKGROUND_CHARS} expected"),
            );
        }
    }

    validate_assessments(case, &mut r);
    let goal_numbers = validate_goals(case, &mut r);
    validate_notes(case, &goal_numbers, &mut r);
    r
}

fn validate_assessments(case: &CaseFile, r: &mut ValidationReport) {
    if case.assessment_results.is_empty() {
        r.error("assessment_results", FindingCode::MissingField, "at least one assessment result is required");
        return;
    }
    for (i, a) in case.assessment_results.iter().enumerate() {
        let p = |f: &str| format!("assessment_results[{i}].{f}");
        r.require_text(p("assessment_name"), &a.assessment_name);
        r.require_text(p("domain"), &a.domain);
        if a.standard_score.is_none() {
            r.error(p("standard_score"), FindingCode::MissingField, "required field is missing or empty");
        }
        match a.percentile {
            None => r.error(p("percentile"), FindingCode::MissingField, "required field is missing or empty"),
            Some(pct) if !(1..=99).contains(&pct) => {
                r.error(p("percentile"), FindingCode::PercentileOutOfRange, format!("percentile {pct} outside 1-99"))
            }
            Some(_) => {}
        }
        let severity = if r.require_text(p("severity"), &a.severity) {
            let s = Severity::parse(&a.severity);
            if s.is_none() {
                r.error(p("severity"), FindingCode::InvalidSeverity, format!("unknown severity {:?}", a.severity));
            }
            s
        } else {
            None
        };
        if let (Some(score), Some(sev)) = (a.standard_score, severity) {
            if !check_score_severity(score, sev) {
                r.warn(p("severity"), FindingCode::ScoreSeverityMismatch, format!("standard score {score} is not in the {sev} band"));
            }
        }
        if let (Some(score), Some(pct)) = (a.standard_score, a.percentile) {
            if (1..=99).contains(&pct) && !check_percentile_consistency(score, pct) {
                r.warn(p("percentile"), FindingCode::PercentileInconsistent, format!("percentile {pct} inconsistent with standard score {score}"));
            }
        }
    }
}

fn validate_goals(case: &CaseFile, r: &mut ValidationReport) -> BTreeSet<i64> {
    let goals = &case.annual_goals;
    if goals.is_empty() {
        r.error("annual_goals", FindingCode::MissingField, "annual goals are required");
        return BTreeSet::new();
    }
    if !(2..=4).contains(&goals.len()) {
        r.error("annual_goals", FindingCode::GoalsCountOutOfRange, format!("{} goals; 2-4 required", goals.len()));
    }
    let mut numbers = BTreeSet::new();
    for (i, g) in goals.iter().enumerate() {
        let p = |f: &str| format!("annual_goals[{i}].{f}");
        match g.goal_number {
            None => r.error(p("goal_number"), FindingCode::MissingField, "required field is missing or empty"),
            Some(n) => {
                if !numbers.insert(n) {
                    r.error(p("goal_number"), FindingCode::DuplicateGoalNumber, format!("goal number {n} repeated"));
                }
            }
        }
        r.require_text(p("goal_brief"), &g.goal_brief);
        r.require_text(p("goal_annual"), &g.goal_annual);
    }
    let contiguous = numbers.iter().copied().eq(1..=numbers.len() as i64);
    if !numbers.is_empty() && !contiguous {
        r.error("annual_goals", FindingCode::NonContiguousGoalNumbers, "goal numbers must run 1..n");
    }
    numbers
}

fn validate_notes(case: &CaseFile, goals: &BTreeSet<i64>, r: &mut ValidationReport) {
    let notes = &case.session_notes;
    if notes.is_empty() {
        r.error("session_notes", FindingCode::MissingField, "session notes are required");
        return;
    }
    if notes.len() != 3 {
        r.error("session_notes", FindingCode::SessionNotesCountMismatch, format!("{} session notes; exactly 3 required", notes.len()));
    }
    for (i, n) in notes.iter().enumerate() {
        let p = |f: &str| format!("session_notes[{i}].{f}");
        if r.require_text(p("date"), &n.date) && n.parsed_date().is_none() {
            r.error(p("date"), FindingCode::InvalidDate, format!("date {:?} is not YYYY-MM-DD", n.date));
        }
        r.require_text(p("duration"), &n.duration);
        if r.require_text(p("setting"), &n.setting) && Setting::parse(&n.setting).is_none() {
            r.error(p("setting"), FindingCode::InvalidSetting, format!("setting {:?} must be Individual or Group", n.setting));
        }
        if r.require_text(p("goal_addressed"), &n.goal_addressed) {
            let refs = goal_references(&n.goal_addressed);
            if refs.is_empty() {
                r.error(p("goal_addressed"), FindingCode::MalformedGoalReference, format!("{:?} names no goal number", n.goal_addressed));
            }
            for g in refs {
                if !goals.contains(&g) {
                    r.error(p("goal_addressed"), FindingCode::DanglingGoalReference, format!("goal {g} does not exist"));
                }
            }
        }
        if r.require_text(p("note"), &n.note) {
            let lower = n.note.to_lowercase();
            let missing: Vec<&str> = ["activity:", "objective data:", "clinical observation:"]
                .into_iter()
                .filter(|s| !lower.contains(s))
                .collect();
            if !missing.is_empty() {
                r.warn(p("note"), FindingCode::NoteSegmentsMissing, format!("note lacks segments {missing:?}"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_model::{AnnualGoal, AssessmentResult, SessionNote};

    pub(crate) fn minimal_case() -> CaseFile {
        CaseFile {
            name: "Test Student".into(),
            age: Some(7),
            grade: "2nd Grade".into(),
            gender: "Female".into(),
            background: "x".repeat(320),
            assessment_results: vec![AssessmentResult {
                assessment_name: "GFTA-3".into(),
                domain: "Articulation".into(),
                standard_score: Some(72),
                percentile: Some(3),
                severity: "Moderate".into(),
            }],
            annual_goals: (1..=2)
                .map(|n| AnnualGoal {
                    goal_number: Some(n),
                    goal_brief: "brief".into(),
                    goal_annual: "annual".into(),
                })
                .collect(),
            session_notes: (0..3)
                .map(|_| SessionNote {
                    date: "2025-01-15".into(),
                    duration: "30 minutes".into(),
                    setting: "Individual".into(),
                    goal_addressed: "Goal 1".into(),
                    note: "Activity: a, Objective Data: 4/10, Clinical Observation: ok".into(),
                })
                .collect(),
        }
    }

    #[test]
    fn minimal_case_is_valid() {
        let r = validate_case(&minimal_case());
        assert!(r.is_valid(), "{r:?}");
        assert!(r.warnings.is_empty(), "{r:?}");
    }

    #[test]
    fn removed_goals_is_missing_field() {
        let mut c = minimal_case();
        c.annual_goals.clear();
        let r = validate_case(&c);
        assert!(r.errors.iter().any(|f| f.field_path == "annual_goals" && f.code == FindingCode::MissingField));
    }

    #[test]
    fn single_goal_out_of_range() {
        let mut c = minimal_case();
        c.annual_goals.truncate(1);
        assert!(validate_case(&c).has_error(FindingCode::GoalsCountOutOfRange));
    }

    #[test]
    fn short_background_is_only_a_warning() {
        let mut c = minimal_case();
        c.background = "Short.".into();
        let r = validate_case(&c);
        assert!(r.is_valid());
        assert!(r.has_warning(FindingCode::BackgroundTooShort));
    }

    #[test]
    fn dangling_and_malformed_references() {
        let mut c = minimal_case();
        c.session_notes[0].goal_addressed = "Goal 5".into();
        c.session_notes[1].goal_addressed = "the first one".into();
        let r = validate_case(&c);
        assert!(r.has_error(FindingCode::DanglingGoalReference));
        assert!(r.has_error(FindingCode::MalformedGoalReference));
    }

    #[test]
    fn goal_numbering_rules() {
        let mut c = minimal_case();
        c.annual_goals[1].goal_number = Some(1);
        assert!(validate_case(&c).has_error(FindingCode::DuplicateGoalNumber));
        c.annual_goals[1].goal_number = Some(3);
        assert!(validate_case(&c).has_error(FindingCode::NonContiguousGoalNumbers));
    }

    #[test]
    fn malformed_scalars() {
        let mut c = minimal_case();
        c.grade = "Sophomore year".into();
        c.assessment_results[0].severity = "Mild/Moderate/Severe".into();
        c.assessment_results[0].percentile = Some(0);
        c.session_notes[2].date = "Jan 15".into();
        c.session_notes[2].setting = "Hybrid".into();
        let r = validate_case(&c);
        for code in [
            FindingCode::InvalidGrade,
            FindingCode::InvalidSeverity,
            FindingCode::PercentileOutOfRange,
            FindingCode::InvalidDate,
            FindingCode::InvalidSetting,
        ] {
            assert!(r.has_error(code), "{code:?}");
        }
    }

    #[test]
    fn empty_case_reports_every_section() {
        let r = validate_case(&CaseFile::default());
        let paths: Vec<&str> = r.errors.iter().map(|f| f.field_path.as_str()).collect();
        for key in crate::case_model::REQUIRED_KEYS {
            assert!(paths.contains(&key), "{key} not reported: {paths:?}");
        }
    }
}
