use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Orchestrator, OrchestratorError};
use crate::case_model::{DisorderType, GradeLevel, Severity};
use crate::llm_gateway::{first_json_object, ModelSpec};
use crate::persistence::{CaseFilter, CaseRecord, CaseStore};
use crate::prompt_engine::RenderedPrompt;

pub const GROUP_TEMPLATE_ID: &str = "group-session-v1";
pub const MAX_GRADE_DISTANCE: usize = 2;
pub const MIN_GROUP: usize = 2;
pub const MAX_GROUP: usize = 4;

/// Which disorder pairings can share a session. Types in one category are
/// compatible when `same_category` is set; `pairs` adds cross-category links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibilityMatrix {
    pub same_category: bool,
    pub pairs: Vec<(DisorderType, DisorderType)>,
}

impl Default for CompatibilityMatrix {
    fn default() -> Self {
        use DisorderType::*;
        CompatibilityMatrix {
            same_category: true,
            pairs: vec![
                (Articulation, ExpressiveLanguage),
                (Phonological, ExpressiveLanguage),
                (Fluency, PragmaticLanguage),
            ],
        }
    }
}

impl CompatibilityMatrix {
    pub fn compatible(&self, a: DisorderType, b: DisorderType) -> bool {
        a == b
            || (self.same_category && a.category() == b.category())
            || self.pairs.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
    }

    /// True when any disorder of `a` pairs with any of `b`.
    pub fn sets_compatible(&self, a: &[DisorderType], b: &[DisorderType]) -> bool {
        a.iter().any(|&x| b.iter().any(|&y| self.compatible(x, y)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRequest {
    pub target_grade: GradeLevel,
    pub desired_size: usize,
    /// Empty accepts any disorder.
    #[serde(default)]
    pub disorders: Vec<DisorderType>,
    /// When set, candidates need a severity within `severity_tolerance` steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<Severity>,
    #[serde(default)]
    pub severity_tolerance: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
}

impl GroupRequest {
    pub fn new(target_grade: GradeLevel, desired_size: usize, disorders: &[DisorderType]) -> Self {
        GroupRequest {
            target_grade,
            desired_size,
            disorders: disorders.to_vec(),
            severity: None,
            severity_tolerance: 0,
            model: None,
        }
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if !(MIN_GROUP..=MAX_GROUP).contains(&self.desired_size) {
            return Err(OrchestratorError::InvalidRequest(format!(
                "group size {} outside {MIN_GROUP}-{MAX_GROUP}",
                self.desired_size
            )));
        }
        Ok(())
    }

    /// Severity steps from the requested band; zero when none is requested.
    pub fn severity_distance(&self, r: &CaseRecord) -> Option<usize> {
        match self.severity {
            None => Some(0),
            Some(want) => r.case.severity().map(|s| s.rank().abs_diff(want.rank())),
        }
    }

    pub fn eligible(&self, r: &CaseRecord, matrix: &CompatibilityMatrix) -> bool {
        let Some(grade) = r.case.grade_level() else { return false };
        grade.distance(self.target_grade) <= MAX_GRADE_DISTANCE
            && (self.disorders.is_empty() || matrix.sets_compatible(&r.disorders, &self.disorders))
            && self.severity_distance(r).is_some_and(|d| d <= self.severity_tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMatch {
    /// Every eligible case, best first. The first `desired_size` form the group.
    pub candidates: Vec<CaseRecord>,
    pub shortfall: usize,
}

impl GroupMatch {
    pub fn selected(&self, size: usize) -> &[CaseRecord] {
        &self.candidates[..size.min(self.candidates.len())]
    }
}

/// Eligible cases ranked by grade distance, then severity distance, then
/// age of the record and case id.
pub fn match_group_candidates(
    store: &CaseStore,
    req: &GroupRequest,
    matrix: &CompatibilityMatrix,
) -> Result<GroupMatch, OrchestratorError> {
    req.validate()?;
    let t = req.target_grade.index();
    let filter = CaseFilter {
        grade_min: GradeLevel::from_index(t.saturating_sub(MAX_GRADE_DISTANCE)),
        grade_max: GradeLevel::from_index((t + MAX_GRADE_DISTANCE).min(GradeLevel::COUNT - 1)),
        ..CaseFilter::default()
    };
    let mut candidates: Vec<CaseRecord> =
        store.search_cases(&filter)?.into_iter().filter(|r| req.eligible(r, matrix)).collect();
    // search order is (created_at, case_id); the stable sort keeps it as the tiebreak
    candidates.sort_by_key(|r| {
        (r.case.grade_level().map_or(usize::MAX, |g| g.distance(req.target_grade)), req.severity_distance(r))
    });
    let shortfall = req.desired_size.saturating_sub(candidates.len());
    Ok(GroupMatch { candidates, shortfall })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberTarget {
    pub case_id: String,
    #[serde(default)]
    pub name: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPlan {
    pub member_case_ids: Vec<String>,
    pub shared_activity: String,
    pub differentiated_targets: Vec<MemberTarget>,
    #[serde(default)]
    pub note: String,
}

fn members_json(members: &[CaseRecord]) -> String {
    let list: Vec<Value> = members
        .iter()
        .map(|m| {
            json!({
                "case_id": m.case_id,
                "name": m.case.name,
                "grade": m.case.grade,
                "disorders": m.disorders.iter().map(|d| d.display_name()).collect::<Vec<_>>(),
                "goals": m.case.annual_goals.iter().map(|g| g.goal_annual.clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&list).expect("members serialize")
}

pub fn group_prompt(members: &[CaseRecord]) -> RenderedPrompt {
    let members = members_json(members);
    let text = format!(
        "You are a school-based speech-language pathologist planning one small-group therapy session.\n\n\
Students and their annual goals:\n{members}\n\n\
Design one shared activity that lets every student practice their own goals. Respond with a JSON object:\n\
{{\"shared_activity\": \"...\", \"differentiated_targets\": [{{\"case_id\": \"...\", \"name\": \"...\", \
\"target\": \"...\"}}], \"note\": \"...\"}}\n\
Give exactly one differentiated target per student, keyed by case_id.\n"
    );
    RenderedPrompt {
        text,
        template_id: GROUP_TEMPLATE_ID.to_string(),
        placeholder_bindings: BTreeMap::from([("members".to_string(), members)]),
    }
}

/// Parses a plan and checks that each member has a non-empty target.
pub fn parse_group_plan(text: &str, members: &[CaseRecord]) -> Result<GroupPlan, OrchestratorError> {
    let value = first_json_object(text)
        .ok_or_else(|| OrchestratorError::PlanIncomplete("a parseable plan object".to_string()))?;
    let get_str = |k: &str| value.get(k).and_then(Value::as_str).unwrap_or("").trim().to_string();
    let targets: Vec<MemberTarget> = value
        .get("differentiated_targets")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or_default();
    let mut ordered = Vec::with_capacity(members.len());
    for m in members {
        let t = targets
            .iter()
            .find(|t| t.case_id == m.case_id && !t.target.trim().is_empty())
            .ok_or_else(|| OrchestratorError::PlanIncomplete(format!("member {}", m.case_id)))?;
        let name = if t.name.is_empty() { m.case.name.clone() } else { t.name.clone() };
        ordered.push(MemberTarget { case_id: m.case_id.clone(), name, target: t.target.trim().to_string() });
    }
    let shared_activity = get_str("shared_activity");
    if shared_activity.is_empty() {
        return Err(OrchestratorError::PlanIncomplete("the shared activity".to_string()));
    }
    Ok(GroupPlan {
        member_case_ids: members.iter().map(|m| m.case_id.clone()).collect(),
        shared_activity,
        differentiated_targets: ordered,
        note: get_str("note"),
    })
}

/// Offline plan built from the member summaries in the prompt bindings.
pub(crate) fn fixture_group_plan(members: &str) -> String {
    let list: Vec<Value> = serde_json::from_str(members).unwrap_or_default();
    let targets: Vec<Value> = list
        .iter()
        .map(|m| {
            let name = m["name"].as_str().unwrap_or("Student");
            let goal = m["goals"].get(0).and_then(Value::as_str).unwrap_or("participate in the shared activity");
            json!({"case_id": m["case_id"], "name": name, "target": format!("{name} works toward: {goal}")})
        })
        .collect();
    let names: Vec<&str> = list.iter().filter_map(|m| m["name"].as_str()).collect();
    json!({
        "shared_activity": "Barrier game with picture cards: each student describes a card for a partner to find.",
        "differentiated_targets": targets,
        "note": format!("Group session with {}. Clinician records accuracy per student on each target.", names.join(", ")),
    })
    .to_string()
}

impl Orchestrator {
    pub fn synthesize_group_session(
        &self,
        members: &[CaseRecord],
        model: &ModelSpec,
    ) -> Result<GroupPlan, OrchestratorError> {
        if !(MIN_GROUP..=MAX_GROUP).contains(&members.len()) {
            return Err(OrchestratorError::InvalidRequest(format!(
                "group plans need {MIN_GROUP}-{MAX_GROUP} members, got {}",
                members.len()
            )));
        }
        let raw = self.gateway.complete(model, &group_prompt(members))?;
        parse_group_plan(&raw.text, members)
    }

    pub fn match_group(&self, store: &CaseStore, req: &GroupRequest) -> Result<GroupMatch, OrchestratorError> {
        match_group_candidates(store, req, &self.config.compatibility)
    }
}
