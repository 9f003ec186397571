//! Case-file data model, disorder taxonomy and deterministic validators.
//!
//! [`CaseFile`] mirrors the JSON object the generation prompts ask for, with
//! field names kept bit-exact. Deserialization is lenient: any JSON object
//! becomes a `CaseFile`, with absent or mistyped fields left empty, so that
//! [`validate_case`] can report problems instead of the parser rejecting them.

mod checks;
mod grade;
mod parse;
mod taxonomy;
mod validate;
mod wire;

use serde::{Deserialize, Serialize};

pub use checks::{
    check_age_grade, check_percentile_consistency, check_score_severity, expected_percentile,
    severity_for_score, AgeOutOfDomain,
};
pub use grade::{GradeLevel, UnknownGrade};
pub use parse::{parse_session_data, parse_smart_goal, Criterion, ObjectiveData, SmartGoalParse};
pub use taxonomy::{
    check_assessment_match, AssessmentCatalog, CatalogEntry, DisorderCategory, DisorderType,
    Instrument, InstrumentCheck, UnknownDisorder, INSTRUMENTS,
};
pub use validate::{validate_case, Finding, FindingCode, ValidationReport};

/// Minimum background length, in characters, for a fully valid case.
pub const MIN_BACKGROUND_CHARS: usize = 300;

/// Required top-level keys of the case-file wire format, in schema order.
pub const REQUIRED_KEYS: [&str; 8] = [
    "name",
    "age",
    "grade",
    "gender",
    "background",
    "assessment_results",
    "annual_goals",
    "session_notes",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Mild,
    Moderate,
    Severe,
}

impl Severity {
    pub const ALL: [Severity; 3] = [Severity::Mild, Severity::Moderate, Severity::Severe];

    pub fn parse(s: &str) -> Option<Severity> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mild" => Some(Severity::Mild),
            "moderate" => Some(Severity::Moderate),
            "severe" => Some(Severity::Severe),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Mild => "Mild",
            Severity::Moderate => "Moderate",
            Severity::Severe => "Severe",
        }
    }

    /// Position on the mild-to-severe scale.
    pub fn rank(self) -> usize {
        match self {
            Severity::Mild => 0,
            Severity::Moderate => 1,
            Severity::Severe => 2,
        }
    }
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setting {
    Individual,
    Group,
}

impl Setting {
    pub fn parse(s: &str) -> Option<Setting> {
        match s.trim().to_ascii_lowercase().as_str() {
            "individual" => Some(Setting::Individual),
            "group" => Some(Setting::Group),
            _ => None,
        }
    }
}

/// A generated student case.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CaseFile {
    #[serde(default, deserialize_with = "wire::string")]
    pub name: String,
    #[serde(default, deserialize_with = "wire::int", skip_serializing_if = "Option::is_none")]
    pub age: Option<i64>,
    #[serde(default, deserialize_with = "wire::string")]
    pub grade: String,
    #[serde(default, deserialize_with = "wire::string")]
    pub gender: String,
    #[serde(default, deserialize_with = "wire::string")]
    pub background: String,
    #[serde(default, deserialize_with = "wire::list")]
    pub assessment_results: Vec<AssessmentResult>,
    #[serde(default, deserialize_with = "wire::list")]
    pub annual_goals: Vec<AnnualGoal>,
    #[serde(default, deserialize_with = "wire::list")]
    pub session_notes: Vec<SessionNote>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AssessmentResult {
    #[serde(default, deserialize_with = "wire::string")]
    pub assessment_name: String,
    #[serde(default, deserialize_with = "wire::string")]
    pub domain: String,
    #[serde(default, deserialize_with = "wire::int", skip_serializing_if = "Option::is_none")]
    pub standard_score: Option<i64>,
    #[serde(default, deserialize_with = "wire::int", skip_serializing_if = "Option::is_none")]
    pub percentile: Option<i64>,
    #[serde(default, deserialize_with = "wire::string")]
    pub severity: String,
}

impl AssessmentResult {
    pub fn severity_level(&self) -> Option<Severity> {
        Severity::parse(&self.severity)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnualGoal {
    #[serde(default, deserialize_with = "wire::int", skip_serializing_if = "Option::is_none")]
    pub goal_number: Option<i64>,
    #[serde(default, deserialize_with = "wire::string")]
    pub goal_brief: String,
    #[serde(default, deserialize_with = "wire::string")]
    pub goal_annual: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionNote {
    #[serde(default, deserialize_with = "wire::string")]
    pub date: String,
    #[serde(default, deserialize_with = "wire::string")]
    pub duration: String,
    #[serde(default, deserialize_with = "wire::string")]
    pub setting: String,
    #[serde(default, deserialize_with = "wire::string")]
    pub goal_addressed: String,
    #[serde(default, deserialize_with = "wire::string")]
    pub note: String,
}

impl SessionNote {
    pub fn parsed_date(&self) -> Option<chrono::NaiveDate> {
        chrono::NaiveDate::parse_from_str(self.date.trim(), "%Y-%m-%d").ok()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CaseParseError {
    #[error("case file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("case file must be a JSON object")]
    NotAnObject,
}

impl CaseFile {
    /// Builds a case from any JSON object; never fails on field content.
    pub fn from_value(value: &serde_json::Value) -> Result<CaseFile, CaseParseError> {
        if !value.is_object() {
            return Err(CaseParseError::NotAnObject);
        }
        Ok(CaseFile::deserialize(value)?)
    }

    pub fn from_json(text: &str) -> Result<CaseFile, CaseParseError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        CaseFile::from_value(&value)
    }

    /// Canonical serialization: pretty-printed, schema key order.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case file serializes")
    }

    pub fn grade_level(&self) -> Option<GradeLevel> {
        self.grade.parse().ok()
    }

    /// Severity of the first assessment carrying a recognised severity.
    pub fn severity(&self) -> Option<Severity> {
        self.assessment_results.iter().find_map(|a| a.severity_level())
    }

    pub fn goal_numbers(&self) -> Vec<i64> {
        self.annual_goals.iter().filter_map(|g| g.goal_number).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn lenient_parse_never_fails_on_objects() {
        let v = json!({
            "name": 42,
            "age": "7",
            "annual_goals": "none",
            "assessment_results": [1, {"standard_score": "72", "percentile": 3.0}],
            "session_notes": null,
        });
        let case = CaseFile::from_value(&v).unwrap();
        assert_eq!(case.name, "42");
        assert_eq!(case.age, Some(7));
        assert!(case.annual_goals.is_empty());
        assert_eq!(case.assessment_results.len(), 2);
        assert_eq!(case.assessment_results[1].standard_score, Some(72));
        assert_eq!(case.assessment_results[1].percentile, Some(3));
        assert!(case.session_notes.is_empty());
        assert!(CaseFile::from_value(&json!([1, 2])).is_err());
    }

    #[test]
    fn canonical_key_order() {
        let case = CaseFile {
            name: "A B".into(),
            age: Some(7),
            ..Default::default()
        };
        let text = case.to_canonical_json();
        let name_at = text.find("\"name\"").unwrap();
        let age_at = text.find("\"age\"").unwrap();
        let notes_at = text.find("\"session_notes\"").unwrap();
        assert!(name_at < age_at && age_at < notes_at);
    }
}
