use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{PatternReport, TranscriptError};
use crate::llm_gateway::{LlmGateway, ModelSpec};
use crate::prompt_engine::RenderedPrompt;

pub const ANALYSIS_TEMPLATE_ID: &str = "transcript-analysis-v1";

/// Section headings requested from the model, in output order.
pub const SECTIONS: [&str; 6] = [
    "Diagnostic Hypotheses",
    "Severity Rating",
    "Estimated Age Range",
    "Recommended Goals",
    "Observations",
    "Recommendations",
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClinicalAnalysis {
    pub diagnostic_hypotheses: String,
    pub severity_rating: String,
    pub estimated_age_range: String,
    pub recommended_goals: String,
    pub observations: String,
    pub recommendations: String,
    /// Headings absent from the response.
    pub missing_sections: Vec<String>,
}

impl ClinicalAnalysis {
    fn slot(&mut self, idx: usize) -> &mut String {
        match idx {
            0 => &mut self.diagnostic_hypotheses,
            1 => &mut self.severity_rating,
            2 => &mut self.estimated_age_range,
            3 => &mut self.recommended_goals,
            4 => &mut self.observations,
            _ => &mut self.recommendations,
        }
    }
}

pub fn analysis_prompt(report: &PatternReport) -> RenderedPrompt {
    let report_json = serde_json::to_string_pretty(report).expect("report serializes");
    let headings: Vec<String> = SECTIONS.iter().map(|s| format!("{s}:")).collect();
    let text = format!(
        "You are a speech-language pathologist supervising graduate clinicians. The following \
pattern report was computed from a de-identified speech sample. Interpret it for a training \
exercise.\n\nPattern report:\n{report_json}\n\nRespond with exactly these headed sections, each \
heading on its own line:\n{}\n",
        headings.join("\n")
    );
    RenderedPrompt {
        text,
        template_id: ANALYSIS_TEMPLATE_ID.to_string(),
        placeholder_bindings: BTreeMap::from([("report".to_string(), report_json)]),
    }
}

// Accepts "Severity:", "## Severity Rating", "**2. Estimated age range:**" and similar.
static HEADING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^\s*(?:#+\s*)?(?:\*\*)?\s*(?:\d+[.)]\s*)?(diagnostic\s+hypothes[ie]s|severity(?:\s+rating)?|(?:estimated\s+)?age\s+range|recommended\s+(?:iep\s+)?goals|(?:clinical\s+)?observations|(?:(?:evidence-based\s+)?intervention\s+)?recommendations)\s*(?:\*\*)?\s*(?::\s*(?:\*\*)?\s*(.*)|$)",
    )
    .unwrap()
});

fn section_index(heading: &str) -> usize {
    let h = heading.to_ascii_lowercase();
    if h.starts_with("diagnostic") {
        0
    } else if h.starts_with("severity") {
        1
    } else if h.contains("age") {
        2
    } else if h.contains("goals") {
        3
    } else if h.contains("observations") {
        4
    } else {
        5
    }
}

pub fn parse_analysis(text: &str) -> Result<ClinicalAnalysis, TranscriptError> {
    let mut out = ClinicalAnalysis::default();
    let mut bodies: [Option<Vec<String>>; 6] = Default::default();
    let mut current: Option<usize> = None;
    for line in text.lines() {
        if let Some(c) = HEADING.captures(line) {
            let idx = section_index(&c[1]);
            let rest = c.get(2).map_or("", |m| m.as_str().trim());
            let body = bodies[idx].get_or_insert_with(Vec::new);
            if !rest.is_empty() {
                body.push(rest.to_string());
            }
            current = Some(idx);
        } else if let Some(idx) = current {
            if !line.trim().is_empty() {
                bodies[idx].get_or_insert_with(Vec::new).push(line.trim().to_string());
            }
        }
    }
    if bodies.iter().all(Option::is_none) {
        return Err(TranscriptError::AnalysisUnparseable);
    }
    for (idx, body) in bodies.into_iter().enumerate() {
        match body {
            Some(lines) => *out.slot(idx) = lines.join("\n"),
            None => out.missing_sections.push(SECTIONS[idx].to_string()),
        }
    }
    Ok(out)
}

pub fn analyze_clinical(
    report: &PatternReport,
    gateway: &LlmGateway,
    spec: &ModelSpec,
) -> Result<ClinicalAnalysis, TranscriptError> {
    let raw = gateway.complete(spec, &analysis_prompt(report))?;
    parse_analysis(&raw.text)
}

/// Deterministic sectioned answer for offline runs, derived from the report.
pub(crate) fn fixture_analysis(report_json: &str) -> String {
    let r: PatternReport = serde_json::from_str(report_json).unwrap_or_else(|_| PatternReport::empty());
    let stutter = r.sound_repetitions + r.syllable_repetitions + r.prolongations + r.blocks;
    let mut hyp = Vec::new();
    if stutter > 0 {
        hyp.push(format!("Fluency disorder to rule out ({stutter} stuttering-like disfluencies observed)"));
    }
    if !r.articulation_candidates.is_empty() {
        hyp.push(format!("Speech sound errors ({} candidate productions)", r.articulation_candidates.len()));
    }
    if !r.morphological_flags.is_empty() {
        hyp.push("Expressive morphology below expectations".to_string());
    }
    if hyp.is_empty() {
        hyp.push("No disorder indicated by this sample".to_string());
    }
    let severity = match stutter + r.articulation_candidates.len() {
        0 => "Within normal limits",
        1..=3 => "Mild",
        4..=8 => "Moderate",
        _ => "Severe",
    };
    let age = match r.mlu_approx {
        m if m < 2.0 => "2-3 years",
        m if m < 3.0 => "3-4 years",
        m if m < 4.0 => "4-5 years",
        _ => "5 years or older",
    };
    format!(
        "Diagnostic Hypotheses:\n{}\n\nSeverity Rating:\n{severity}\n\nEstimated Age Range:\n{age}\n\n\
Recommended Goals:\nStudent will produce target words with 80% accuracy in 4 out of 5 sessions as measured by clinician data.\n\n\
Observations:\nMLU approximately {:.2} words; average word length {:.2} characters.\n\n\
Recommendations:\nCollect a longer sample across settings before confirming any hypothesis.\n",
        hyp.join("\n"),
        r.mlu_approx,
        r.avg_word_length
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_gateway::{FixtureProvider, RetryPolicy};
    use std::sync::Arc;

    #[test]
    fn fixture_round_trip() {
        let gw = LlmGateway::new(RetryPolicy::no_delay(), 1).with_fixture(Arc::new(FixtureProvider::synthesizing()));
        let mut r = PatternReport::empty();
        r.sound_repetitions = 2;
        r.mlu_approx = 3.5;
        let a = analyze_clinical(&r, &gw, &ModelSpec::fixture("fx")).unwrap();
        assert!(a.missing_sections.is_empty());
        assert_eq!(a.severity_rating, "Mild");
        assert_eq!(a.estimated_age_range, "4-5 years");
        assert!(a.diagnostic_hypotheses.contains("Fluency"));
    }

    #[test]
    fn empty_report_is_a_valid_request() {
        let gw = LlmGateway::new(RetryPolicy::no_delay(), 1).with_fixture(Arc::new(FixtureProvider::synthesizing()));
        let a = analyze_clinical(&PatternReport::empty(), &gw, &ModelSpec::fixture("fx")).unwrap();
        assert_eq!(a.severity_rating, "Within normal limits");
    }

    #[test]
    fn markdown_headings_and_missing_sections() {
        let text = "## Diagnostic Hypotheses\nStuttering\n**Severity:** moderate\n3. Estimated age range: 6-7\nextra line";
        let a = parse_analysis(text).unwrap();
        assert_eq!(a.diagnostic_hypotheses, "Stuttering");
        assert_eq!(a.severity_rating, "moderate");
        assert_eq!(a.estimated_age_range, "6-7\nextra line");
        assert_eq!(a.missing_sections, vec!["Recommended Goals", "Observations", "Recommendations"]);
    }

    #[test]
    fn prose_is_unparseable() {
        let err = parse_analysis("The child seems to be doing fine overall.").unwrap_err();
        assert_eq!(err.code(), "analysis_unparseable");
    }
}
