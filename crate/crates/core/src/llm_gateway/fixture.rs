use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};

use super::{synthesize_case, GatewayError, LlmProvider, ModelSpec, TokenUsage};
use crate::prompt_engine::RenderedPrompt;

#[derive(Debug, Clone, PartialEq)]
pub enum ScriptStep {
    Text(String),
    Fail(GatewayError),
}

/// Offline provider. Answers, in order of precedence: a canned response for
/// the request digest, the next scripted step, or a case synthesized from the
/// prompt bindings (when enabled).
#[derive(Debug, Default)]
pub struct FixtureProvider {
    canned: RwLock<HashMap<String, String>>,
    script: Mutex<VecDeque<ScriptStep>>,
    synthesize: bool,
    calls: AtomicU64,
}

impl FixtureProvider {
    /// Canned and scripted responses only.
    pub fn new() -> Self {
        FixtureProvider::default()
    }

    pub fn synthesizing() -> Self {
        FixtureProvider { synthesize: true, ..Default::default() }
    }

    pub fn add_canned(&self, digest: &str, text: &str) {
        self.canned.write().unwrap().insert(digest.to_string(), text.to_string());
    }

    pub fn push(&self, step: ScriptStep) {
        self.script.lock().unwrap().push_back(step);
    }

    pub fn push_text(&self, text: &str) {
        self.push(ScriptStep::Text(text.to_string()));
    }

    pub fn clear_script(&self) {
        self.script.lock().unwrap().clear();
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl LlmProvider for FixtureProvider {
    fn complete_once(
        &self,
        _spec: &ModelSpec,
        prompt: &RenderedPrompt,
        digest: &str,
    ) -> Result<(String, Option<TokenUsage>), GatewayError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(text) = self.canned.read().unwrap().get(digest) {
            return Ok((text.clone(), None));
        }
        if let Some(step) = self.script.lock().unwrap().pop_front() {
            return match step {
                ScriptStep::Text(t) => Ok((t, None)),
                ScriptStep::Fail(e) => Err(e),
            };
        }
        if self.synthesize && prompt.template_id == crate::quality::JUDGE_TEMPLATE_ID {
            return Ok((judge_from_rules(prompt), None));
        }
        if self.synthesize && prompt.template_id == crate::transcript::ANALYSIS_TEMPLATE_ID {
            let report = prompt.placeholder_bindings.get("report").map(String::as_str).unwrap_or("{}");
            return Ok((crate::transcript::fixture_analysis(report), None));
        }
        if self.synthesize && prompt.template_id == crate::orchestrator::GROUP_TEMPLATE_ID {
            let members = prompt.placeholder_bindings.get("members").map(String::as_str).unwrap_or("[]");
            return Ok((crate::orchestrator::fixture_group_plan(members), None));
        }
        if self.synthesize {
            let case = synthesize_case(&prompt.placeholder_bindings, digest);
            let text = case.to_canonical_json();
            return Ok((text, None));
        }
        Err(GatewayError::provider(format!("no fixture response for digest {digest}"), false))
    }
}

/// Offline judge: reports the deterministic rule scores as judge output.
fn judge_from_rules(prompt: &RenderedPrompt) -> String {
    use crate::quality::{score_case, RubricConfig, ScoringContext};
    let get = |k: &str| prompt.placeholder_bindings.get(k).map(String::as_str).unwrap_or("");
    let case = crate::CaseFile::from_json(get("case")).unwrap_or_default();
    let disorders = get("disorders").split(',').filter_map(|s| s.trim().parse().ok()).collect();
    let ctx = ScoringContext { disorders, grade: None };
    let s = score_case(&case, &ctx, &RubricConfig::default());
    let why = |d: crate::quality::Dimension| {
        let codes: Vec<&str> = s.issues.iter().filter(|i| i.dimension == d).map(|i| i.code.as_str()).collect();
        if codes.is_empty() { "no issues found".to_string() } else { codes.join(", ") }
    };
    use crate::quality::Dimension::*;
    serde_json::json!({
        "structural": {"score": s.structural, "justification": why(Structural)},
        "consistency": {"score": s.consistency, "justification": why(Consistency)},
        "clinical": {"score": s.clinical, "justification": why(Clinical)},
        "documentation": {"score": s.documentation, "justification": why(Documentation)},
    })
    .to_string()
}
