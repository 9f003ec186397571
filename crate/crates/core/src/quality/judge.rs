//! LLM-as-judge scoring.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Dimension, QualityError, QualityScore, ScoringContext};
use crate::case_model::CaseFile;
use crate::llm_gateway::{first_json_object, LlmGateway, ModelSpec};
use crate::prompt_engine::{disorder_list, RenderedPrompt};

pub const JUDGE_TEMPLATE_ID: &str = "judge-rubric-v1";

const RUBRIC: &str = "You are an experienced school-based speech-language pathologist reviewing a \
simulated case file used for clinical training. Score each dimension independently on a 1-5 scale \
(5 = ready for use, 1 = major deficiencies requiring complete revision).

structural: all required fields are present and populated (demographics, background of at least \
300 characters, assessment results, 2-4 annual goals, 3 session notes).
consistency: session notes reference existing goal numbers, the background mentions every target \
disorder, goals address the target disorders, and assessment instruments fit the disorders.
clinical: age fits the grade, expectations and activities are developmentally appropriate, \
standard scores, percentiles and severity agree.
documentation: annual goals are SMART (timeframe, named student, condition, criterion, \
measurement) and session notes contain objective data.

Return only JSON of the form:
{\"structural\": {\"score\": 5, \"justification\": \"...\"}, \"consistency\": {...}, \
\"clinical\": {...}, \"documentation\": {...}}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeOutcome {
    pub score: QualityScore,
    pub justifications: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

pub fn judge_prompt(case: &CaseFile, ctx: &ScoringContext) -> String {
    format!(
        "{RUBRIC}\n\nTarget disorders: {}\n\nCase file:\n{}",
        disorder_list(&ctx.disorders),
        case.to_canonical_json()
    )
}

/// Judge prompt with the case and disorders kept as bindings, so offline
/// providers can answer without parsing the text.
pub fn judge_rendered_prompt(case: &CaseFile, ctx: &ScoringContext) -> RenderedPrompt {
    RenderedPrompt {
        text: judge_prompt(case, ctx),
        template_id: JUDGE_TEMPLATE_ID.to_string(),
        placeholder_bindings: BTreeMap::from([
            ("case".to_string(), case.to_canonical_json()),
            ("disorders".to_string(), disorder_list(&ctx.disorders)),
        ]),
    }
}

fn aliases(d: Dimension) -> &'static [&'static str] {
    match d {
        Dimension::Structural => &["structural", "structural_completeness", "completeness"],
        Dimension::Consistency => &["consistency", "internal_consistency"],
        Dimension::Clinical => &["clinical", "clinical_appropriateness", "appropriateness"],
        Dimension::Documentation => &["documentation", "documentation_quality"],
    }
}

fn number(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f.round() as i64)),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn from_json(obj: &serde_json::Map<String, Value>) -> Option<BTreeMap<Dimension, (i64, String)>> {
    let mut out = BTreeMap::new();
    for d in Dimension::ALL {
        let v = aliases(d).iter().find_map(|k| obj.get(*k))?;
        let entry = match v {
            Value::Object(inner) => {
                let score = inner.get("score").and_then(number)?;
                let why = inner.get("justification").and_then(Value::as_str).unwrap_or("").to_string();
                (score, why)
            }
            other => (number(other)?, String::new()),
        };
        out.insert(d, entry);
    }
    Some(out)
}

static PROSE_SCORE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(structural|consistency|clinical|documentation)\w*[^0-9\n]{0,40}?(\d+)\s*(?:/\s*5)?").unwrap()
});

fn from_prose(text: &str) -> Option<BTreeMap<Dimension, (i64, String)>> {
    let mut out = BTreeMap::new();
    for c in PROSE_SCORE.captures_iter(text) {
        let d = match c[1].to_ascii_lowercase().as_str() {
            "structural" => Dimension::Structural,
            "consistency" => Dimension::Consistency,
            "clinical" => Dimension::Clinical,
            _ => Dimension::Documentation,
        };
        if let Ok(n) = c[2].parse() {
            out.entry(d).or_insert((n, String::new()));
        }
    }
    (out.len() == 4).then_some(out)
}

/// Reads four dimension scores from judge output; JSON first, then
/// "dimension: N" prose. Out-of-range scores are clamped with a warning.
pub fn parse_judge_output(text: &str) -> Result<JudgeOutcome, QualityError> {
    let parsed = first_json_object(text)
        .and_then(|v| v.as_object().and_then(from_json))
        .or_else(|| from_prose(text))
        .ok_or_else(|| QualityError::JudgeUnparseable(text.chars().take(120).collect()))?;
    let mut warnings = Vec::new();
    let mut justifications = BTreeMap::new();
    let mut clamp = |d: Dimension| -> u8 {
        let (raw, why) = &parsed[&d];
        if !why.is_empty() {
            justifications.insert(d.as_str().to_string(), why.clone());
        }
        let v = (*raw).clamp(1, 5);
        if v != *raw {
            let msg = format!("{} score {raw} clamped to {v}", d.as_str());
            tracing::warn!("{msg}");
            warnings.push(msg);
        }
        v as u8
    };
    let score = QualityScore::new(
        clamp(Dimension::Structural),
        clamp(Dimension::Consistency),
        clamp(Dimension::Clinical),
        clamp(Dimension::Documentation),
    );
    Ok(JudgeOutcome { score, justifications, warnings })
}

pub fn llm_judge(
    gateway: &LlmGateway,
    spec: &ModelSpec,
    case: &CaseFile,
    ctx: &ScoringContext,
) -> Result<JudgeOutcome, QualityError> {
    let raw = gateway.complete(spec, &judge_rendered_prompt(case, ctx))?;
    parse_judge_output(&raw.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_scores() {
        let out = parse_judge_output(
            r#"{"structural":5,"consistency":{"score":4,"justification":"one gap"},"clinical":4,"documentation":5}"#,
        )
        .unwrap();
        assert_eq!(out.score, QualityScore::new(5, 4, 4, 5));
        assert_eq!(out.justifications["consistency"], "one gap");
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn clamps_out_of_range() {
        let out = parse_judge_output(r#"{"structural":7,"consistency":4,"clinical":0,"documentation":5}"#).unwrap();
        assert_eq!(out.score.values(), [5, 4, 1, 5]);
        assert_eq!(out.warnings.len(), 2);
    }

    #[test]
    fn prose_scores() {
        let text = "Structural completeness: 5/5\nInternal consistency - 4\nClinical appropriateness: 4\nDocumentation quality: 5";
        assert_eq!(parse_judge_output(text).unwrap().score.values(), [5, 4, 4, 5]);
    }

    #[test]
    fn prose_only_is_unparseable() {
        let err = parse_judge_output("This case looks great overall.").unwrap_err();
        assert_eq!(err.code(), "judge_unparseable");
    }
}
