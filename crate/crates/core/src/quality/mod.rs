//! Rubric scoring of case files and aggregation of scores.
//!
//! Four dimensions are scored 1-5 by deterministic rules: structural
//! completeness, internal consistency, clinical appropriateness and
//! documentation quality. An LLM judge can score the same dimensions; its
//! results are kept separate from the rule scores.

mod aggregate;
mod judge;
mod rules;

use serde::{Deserialize, Serialize};

use crate::case_model::{DisorderType, GradeLevel};

pub use aggregate::{aggregate, aggregate_group, display_2dp, overall_from_means, report_table, round_half_up_2dp, AggregateReport};
pub use judge::{judge_prompt, judge_rendered_prompt, llm_judge, parse_judge_output, JudgeOutcome, JUDGE_TEMPLATE_ID};
pub use rules::{
    count_structural_fields, score_case, score_clinical, score_consistency, score_documentation,
    score_structural, STRUCTURAL_FIELD_TOTAL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Structural,
    Consistency,
    Clinical,
    Documentation,
}

impl Dimension {
    pub const ALL: [Dimension; 4] =
        [Dimension::Structural, Dimension::Consistency, Dimension::Clinical, Dimension::Documentation];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Structural => "structural",
            Dimension::Consistency => "consistency",
            Dimension::Clinical => "clinical",
            Dimension::Documentation => "documentation",
        }
    }
}

/// Error taxonomy shared with expert error tagging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    DevelopmentalInappropriateness,
    DisorderGoalMisalignment,
    InternalInconsistency,
    DocumentationStandardViolation,
    CulturalInsensitivity,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 5] = [
        ErrorCategory::DevelopmentalInappropriateness,
        ErrorCategory::DisorderGoalMisalignment,
        ErrorCategory::InternalInconsistency,
        ErrorCategory::DocumentationStandardViolation,
        ErrorCategory::CulturalInsensitivity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::DevelopmentalInappropriateness => "developmental_inappropriateness",
            ErrorCategory::DisorderGoalMisalignment => "disorder_goal_misalignment",
            ErrorCategory::InternalInconsistency => "internal_inconsistency",
            ErrorCategory::DocumentationStandardViolation => "documentation_standard_violation",
            ErrorCategory::CulturalInsensitivity => "cultural_insensitivity",
        }
    }

    pub fn parse(s: &str) -> Option<ErrorCategory> {
        ErrorCategory::ALL.into_iter().find(|c| c.as_str() == s.trim())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub dimension: Dimension,
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<ErrorCategory>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityScore {
    pub structural: u8,
    pub consistency: u8,
    pub clinical: u8,
    pub documentation: u8,
    #[serde(default)]
    pub issues: Vec<Issue>,
}

impl QualityScore {
    pub fn new(structural: u8, consistency: u8, clinical: u8, documentation: u8) -> Self {
        QualityScore { structural, consistency, clinical, documentation, issues: Vec::new() }
    }

    pub fn get(&self, d: Dimension) -> u8 {
        match d {
            Dimension::Structural => self.structural,
            Dimension::Consistency => self.consistency,
            Dimension::Clinical => self.clinical,
            Dimension::Documentation => self.documentation,
        }
    }

    pub fn values(&self) -> [u8; 4] {
        [self.structural, self.consistency, self.clinical, self.documentation]
    }

    /// Mean of the four dimensions; derived, never stored.
    pub fn overall(&self) -> f64 {
        self.values().iter().map(|v| *v as f64).sum::<f64>() / 4.0
    }
}

/// The request a case was generated for. Checks that compare the case
/// against requested disorders are skipped when `disorders` is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringContext {
    pub disorders: Vec<DisorderType>,
    #[serde(default)]
    pub grade: Option<GradeLevel>,
}

impl ScoringContext {
    pub fn new(disorders: &[DisorderType]) -> Self {
        ScoringContext { disorders: disorders.to_vec(), grade: None }
    }
}

/// Score thresholds and check weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RubricConfig {
    /// Field proportions giving structural scores 4, 3 and 2.
    pub structural_thresholds: [f64; 3],
    pub min_background_chars: usize,
    /// Points deducted per failed consistency check (a)-(d).
    pub consistency_weights: [u8; 4],
    /// Points deducted per failed clinical check: age-grade, background
    /// length, score-severity, percentile, instrument.
    pub clinical_weights: [u8; 5],
}

impl Default for RubricConfig {
    fn default() -> Self {
        RubricConfig {
            structural_thresholds: [0.9, 0.75, 0.5],
            min_background_chars: crate::case_model::MIN_BACKGROUND_CHARS,
            consistency_weights: [1; 4],
            clinical_weights: [1; 5],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum QualityError {
    #[error("judge output could not be parsed: {0}")]
    JudgeUnparseable(String),
    #[error("group {0} has no scores")]
    EmptyGroup(String),
    #[error(transparent)]
    Gateway(#[from] crate::llm_gateway::GatewayError),
}

impl QualityError {
    pub fn code(&self) -> &'static str {
        match self {
            QualityError::JudgeUnparseable(_) => "judge_unparseable",
            QualityError::EmptyGroup(_) => "empty_group",
            QualityError::Gateway(e) => e.code(),
        }
    }
}
