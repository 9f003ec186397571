//! Generation modes: single case, batch with diversity control, roster
//! upload and group sessions.

mod batch;
mod clock;
mod group;
mod nl;
mod provenance;
mod pseudonym;
mod roster;

use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use batch::{
    largest_remainder, plan_batch, BatchItem, BatchOutcome, BatchSpec, CasePlan, DistKey, Distribution, InputMethod,
    ItemFailure, Scenario, Weighted, MAX_BATCH,
};
pub use clock::{format_timestamp, Clock, FixedClock, SystemClock};
pub use group::{
    group_prompt, match_group_candidates, parse_group_plan, CompatibilityMatrix, GroupMatch, GroupPlan, GroupRequest,
    MemberTarget, GROUP_TEMPLATE_ID, MAX_GRADE_DISTANCE, MAX_GROUP, MIN_GROUP,
};
pub(crate) use group::fixture_group_plan;
pub use nl::{parse_natural_language_request, NlDefaults, ParsedRequest};
pub use provenance::{Provenance, RetrievedChunk};
pub use pseudonym::{generate_pseudonym, PseudonymGenerator, BACKGROUNDS};
pub use roster::{load_roster, parse_roster, RosterOutcome, RosterRowError};

use crate::case_model::{validate_case, CaseFile, DisorderType, GradeLevel, ValidationReport};
use crate::knowledge_base::{format_context, KbError, KnowledgeBase, KnowledgeQuery, DEFAULT_K};
use crate::llm_gateway::{extract_json, ExtractionStatus, GatewayError, LlmGateway, ModelSpec};
use crate::persistence::{CaseRecord, StoreError};
use crate::prompt_engine::{render, PromptBindings, PromptError, TemplateStore};

/// Extra attempts after the first when a reply is not a valid case.
pub const DEFAULT_MAX_RETRIES: u32 = 2;
pub const DEFAULT_WORKERS: usize = 4;
pub const MAX_DISORDERS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub disorders: Vec<DisorderType>,
    pub grade: GradeLevel,
    #[serde(default)]
    pub population_spec: String,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GenerationRequest {
    pub fn new(disorders: &[DisorderType], grade: GradeLevel, population_spec: &str, model: ModelSpec) -> Self {
        GenerationRequest {
            disorders: disorders.to_vec(),
            grade,
            population_spec: population_spec.to_string(),
            model,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if self.disorders.is_empty() || self.disorders.len() > MAX_DISORDERS {
            return Err(OrchestratorError::InvalidRequest(format!(
                "expected 1-{MAX_DISORDERS} disorders, got {}",
                self.disorders.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedCase {
    pub case: CaseFile,
    pub provenance: Provenance,
    /// Validation of the accepted case; warnings only.
    pub validation: ValidationReport,
}

impl GeneratedCase {
    /// Stable id derived from the request digest and timestamp.
    pub fn case_id(&self) -> String {
        let seed = format!("{}|{}", self.provenance.request_digest, format_timestamp(&self.provenance.timestamp));
        format!("case-{}", &crate::util::sha256_hex(seed.as_bytes())[..16])
    }

    pub fn into_record(self) -> CaseRecord {
        CaseRecord {
            case_id: self.case_id(),
            disorders: self.provenance.disorders.clone(),
            created_at: self.provenance.timestamp,
            case: self.case,
            provenance: Some(self.provenance),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no valid case after {attempts} attempts: {diagnostics}")]
    GenerationFailedAfterRetries {
        attempts: u32,
        diagnostics: String,
        /// Set when the last reply parsed but failed validation.
        last_report: Option<ValidationReport>,
    },
    #[error("all {0} cases failed")]
    AllCasesFailed(usize),
    #[error("unparseable request: {0}")]
    UnparseableRequest(String),
    #[error("roster is missing required column {0:?}")]
    MissingRequiredColumn(String),
    #[error("roster has no data rows")]
    EmptyRoster,
    #[error("roster: {0}")]
    Roster(String),
    #[error("group plan leaves out {0}")]
    PlanIncomplete(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Knowledge(#[from] KbError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl OrchestratorError {
    pub fn code(&self) -> &'static str {
        match self {
            OrchestratorError::InvalidRequest(_) => "invalid_request",
            OrchestratorError::GenerationFailedAfterRetries { .. } => "generation_failed_after_retries",
            OrchestratorError::AllCasesFailed(_) => "all_cases_failed",
            OrchestratorError::UnparseableRequest(_) => "unparseable_request",
            OrchestratorError::MissingRequiredColumn(_) => "missing_required_column",
            OrchestratorError::EmptyRoster => "empty_roster",
            OrchestratorError::Roster(_) => "invalid_roster",
            OrchestratorError::PlanIncomplete(_) => "plan_incomplete",
            OrchestratorError::Gateway(e) => e.code(),
            OrchestratorError::Knowledge(e) => e.code(),
            OrchestratorError::Prompt(e) => e.code(),
            OrchestratorError::Store(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrchestratorConfig {
    pub k: usize,
    pub max_retries: u32,
    pub workers: usize,
    #[serde(default)]
    pub compatibility: CompatibilityMatrix,
    #[serde(default)]
    pub nl_defaults: NlDefaults,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig {
            k: DEFAULT_K,
            max_retries: DEFAULT_MAX_RETRIES,
            workers: DEFAULT_WORKERS,
            compatibility: CompatibilityMatrix::default(),
            nl_defaults: NlDefaults::default(),
        }
    }
}

/// Runs the retrieve, render, complete, extract and validate pipeline.
pub struct Orchestrator {
    pub(crate) kb: Arc<KnowledgeBase>,
    pub(crate) templates: Arc<TemplateStore>,
    pub(crate) gateway: Arc<LlmGateway>,
    pub(crate) clock: Arc<dyn Clock>,
    pub(crate) config: OrchestratorConfig,
}

impl Orchestrator {
    pub fn new(kb: Arc<KnowledgeBase>, templates: Arc<TemplateStore>, gateway: Arc<LlmGateway>) -> Self {
        Orchestrator { kb, templates, gateway, clock: Arc::new(SystemClock), config: OrchestratorConfig::default() }
    }

    /// Bundled corpus and templates, fixture provider, fixed clock.
    pub fn offline() -> Result<Self, OrchestratorError> {
        Ok(Orchestrator::new(
            Arc::new(KnowledgeBase::bundled_fixture()?),
            Arc::new(TemplateStore::bundled()),
            Arc::new(LlmGateway::default()),
        )
        .with_clock(Arc::new(FixedClock::default_start())))
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_config(mut self, config: OrchestratorConfig) -> Self {
        self.config = config;
        self
    }

    pub fn config(&self) -> &OrchestratorConfig {
        &self.config
    }

    pub fn gateway(&self) -> &Arc<LlmGateway> {
        &self.gateway
    }

    pub fn knowledge_base(&self) -> &Arc<KnowledgeBase> {
        &self.kb
    }

    pub fn templates(&self) -> &Arc<TemplateStore> {
        &self.templates
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn generate_case(&self, req: &GenerationRequest) -> Result<GeneratedCase, OrchestratorError> {
        let at = self.clock.now();
        self.generate_case_at(req, at)
    }

    /// Same as [`Orchestrator::generate_case`] with the provenance time fixed
    /// by the caller, so parallel batches stay reproducible.
    pub fn generate_case_at(
        &self,
        req: &GenerationRequest,
        timestamp: DateTime<Utc>,
    ) -> Result<GeneratedCase, OrchestratorError> {
        req.validate()?;
        let mut query = KnowledgeQuery::new(req.disorders.clone(), req.grade, &req.population_spec);
        query.k = self.config.k;
        let retrieved = self.kb.search(&query)?;
        let context = format_context(&retrieved);
        let class = match req.model.model_class {
            Some(c) => c,
            None => self.templates.class_for_model(&req.model.model_id)?,
        };
        let template = self.templates.select_template(class)?;
        let bindings = PromptBindings::new(&req.disorders, req.grade, &req.population_spec, &context);
        let prompt = render(template, &bindings.to_map())?;

        let attempts = self.config.max_retries + 1;
        let mut diagnostics = String::new();
        let mut last_report = None;
        for attempt in 1..=attempts {
            let raw = self.gateway.complete(&req.model, &prompt)?;
            let outcome = extract_json(&raw);
            if outcome.status != ExtractionStatus::Ok {
                diagnostics = format!("{:?}: {}", outcome.status, outcome.diagnostics);
                last_report = None;
                tracing::warn!(attempt, %diagnostics, "reply is not a complete case");
                continue;
            }
            let payload = outcome.payload.expect("ok extraction has a payload");
            let case = match CaseFile::from_value(&payload) {
                Ok(c) => c,
                Err(e) => {
                    diagnostics = e.to_string();
                    continue;
                }
            };
            let report = validate_case(&case);
            if !report.is_valid() {
                diagnostics = report.errors.iter().map(|f| format!("{}: {}", f.field_path, f.message)).collect::<Vec<_>>().join("; ");
                tracing::warn!(attempt, %diagnostics, "case failed validation");
                last_report = Some(report);
                continue;
            }
            let provenance = Provenance {
                retrieved: retrieved
                    .iter()
                    .map(|r| RetrievedChunk { chunk_id: r.embedded_chunk.id(), similarity: r.similarity })
                    .collect(),
                template_id: prompt.template_id.clone(),
                model_id: raw.model_id.clone(),
                request_digest: raw.request_digest.clone(),
                timestamp,
                attempts: attempt,
                disorders: req.disorders.clone(),
                grade: req.grade,
                seed: req.seed,
            };
            return Ok(GeneratedCase { case, provenance, validation: report });
        }
        Err(OrchestratorError::GenerationFailedAfterRetries { attempts, diagnostics, last_report })
    }
}
