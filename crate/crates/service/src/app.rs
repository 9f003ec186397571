use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use caseforge_core::case_model::{DisorderType, GradeLevel, Severity, ValidationReport};
use caseforge_core::knowledge_base::{
    bundled_corpus, load_manifest, ChunkOptions, Embedder, FixtureEmbedder, HttpEmbedder, IngestSummary,
    KnowledgeBase,
};
use caseforge_core::llm_gateway::{LlmGateway, ModelSpec, RetryPolicy};
use caseforge_core::orchestrator::{
    parse_natural_language_request, parse_roster, BatchOutcome, BatchSpec, Clock, FixedClock, GenerationRequest,
    GroupMatch, GroupPlan, GroupRequest, Orchestrator, RosterRowError, SystemClock,
};
use caseforge_core::persistence::{
    tags_from_score, CaseFilter, CaseRecord, CaseStore, ErrorReport, ErrorTag, FeedbackRecord, GroupBy, Ratings,
    ReportFilter, TagSource, RULES_SCORER,
};
use caseforge_core::prompt_engine::TemplateStore;
use caseforge_core::quality::{llm_judge, score_case, AggregateReport, ErrorCategory, QualityScore, ScoringContext};
use caseforge_core::transcript::{
    analyze_clinical, analyze_transcript, ClinicalAnalysis, DisfluencyOptions, PatternReport, Transcript, Utterance,
};
use serde::{Deserialize, Serialize};

use crate::config::{EmbedderConfig, ServiceConfig};
use crate::error::ApiError;
use crate::export::{export_case, ExportFormat};

pub type ApiResult<T> = Result<T, ApiError>;

/// Shared application state. Every operation here is synchronous; the HTTP
/// layer runs them on blocking threads and the CLI calls them directly.
pub struct App {
    pub config: ServiceConfig,
    pub orchestrator: Orchestrator,
    pub store: Arc<CaseStore>,
    secrets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRequest {
    pub disorders: Vec<DisorderType>,
    pub grade: GradeLevel,
    #[serde(default)]
    pub population_spec: String,
    /// Configured provider name; the default provider when absent.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResponse {
    pub record: CaseRecord,
    pub validation: ValidationReport,
}

/// Exactly one of `spec`, `text` or `roster` (CSV text).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchBody {
    #[serde(default)]
    pub spec: Option<BatchSpec>,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub roster: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    /// Overrides the seed of `spec` or of the parsed text.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItemSummary {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub seed: Option<u64>,
    pub requested: usize,
    pub succeeded: usize,
    pub items: Vec<BatchItemSummary>,
    pub warnings: Vec<String>,
    #[serde(default)]
    pub roster_errors: Vec<RosterRowError>,
}

/// A prepared batch: the planned requests and any parse findings.
pub struct PreparedBatch {
    kind: PreparedKind,
    pub total: usize,
    warnings: Vec<String>,
    roster_errors: Vec<RosterRowError>,
}

enum PreparedKind {
    Spec(BatchSpec, ModelSpec),
    Requests(Vec<GenerationRequest>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanBody {
    pub member_ids: Vec<String>,
    #[serde(default)]
    pub model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeResult {
    pub model: String,
    pub score: QualityScore,
    pub overall: f64,
    pub justifications: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub case_id: String,
    pub score: QualityScore,
    pub overall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub judge: Option<JudgeResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagBody {
    pub category: ErrorCategory,
    #[serde(default)]
    pub severe: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackBody {
    pub reviewer_id: String,
    pub ratings: Ratings,
    #[serde(default)]
    pub free_text: String,
    #[serde(default)]
    pub error_tags: Vec<TagBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackResponse {
    pub feedback_id: i64,
    pub tag_ids: Vec<i64>,
}

/// Transcript as utterances or as JSON-lines text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeBody {
    #[serde(default)]
    pub utterances: Option<Vec<Utterance>>,
    #[serde(default)]
    pub jsonl: Option<String>,
    #[serde(default)]
    pub deidentify: bool,
    /// Expected word to spelling of its correct production.
    #[serde(default)]
    pub lexicon: BTreeMap<String, String>,
    #[serde(default)]
    pub pause_threshold_s: Option<f64>,
    /// Provider name; requests the sectioned clinical analysis when set.
    #[serde(default)]
    pub clinical_model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResponse {
    pub report: PatternReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replacements: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clinical: Option<ClinicalAnalysis>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseQuery {
    pub disorder: Option<String>,
    pub grade_min: Option<String>,
    pub grade_max: Option<String>,
    pub severity: Option<String>,
    pub model: Option<String>,
}

impl CaseQuery {
    pub fn to_filter(&self) -> ApiResult<CaseFilter> {
        let grade = |g: &Option<String>| -> ApiResult<Option<GradeLevel>> {
            g.as_deref().map(|s| s.parse().map_err(|e: caseforge_core::case_model::UnknownGrade| ApiError::bad_request(e.to_string()))).transpose()
        };
        Ok(CaseFilter {
            disorder: self
                .disorder
                .as_deref()
                .map(|s| s.parse().map_err(|e: caseforge_core::case_model::UnknownDisorder| ApiError::bad_request(e.to_string())))
                .transpose()?,
            grade_min: grade(&self.grade_min)?,
            grade_max: grade(&self.grade_max)?,
            severity: self
                .severity
                .as_deref()
                .map(|s| Severity::parse(s).ok_or_else(|| ApiError::bad_request(format!("unknown severity {s:?}"))))
                .transpose()?,
            model_id: self.model.clone(),
        })
    }
}

pub fn parse_group_by(s: Option<&str>) -> ApiResult<GroupBy> {
    match s.map(|s| s.trim().to_ascii_lowercase()).as_deref() {
        None | Some("") | Some("none") => Ok(GroupBy::None),
        Some("model") => Ok(GroupBy::Model),
        Some("disorder") => Ok(GroupBy::Disorder),
        Some("month") => Ok(GroupBy::Month),
        Some(other) => Err(ApiError::bad_request(format!("unknown group_by {other:?}"))),
    }
}

fn embedder(cfg: &EmbedderConfig) -> Arc<dyn Embedder> {
    match cfg {
        EmbedderConfig::Fixture { dimension } => Arc::new(FixtureEmbedder::new(*dimension)),
        EmbedderConfig::Http { endpoint, model, dimension, api_key_env } => {
            Arc::new(HttpEmbedder::new(endpoint, model, api_key_env.as_deref(), *dimension))
        }
    }
}

impl App {
    pub fn from_config(config: ServiceConfig) -> ApiResult<App> {
        config.validate().map_err(|e| ApiError::bad_request(e.to_string()))?;
        let clock: Arc<dyn Clock> =
            if config.fixed_clock { Arc::new(FixedClock::default_start()) } else { Arc::new(SystemClock) };
        let emb = embedder(&config.knowledge.embedder);
        let kb = match &config.knowledge.store_path {
            Some(path) => {
                let kb = KnowledgeBase::open(path, emb).map_err(|e| ApiError::new(e.code(), e.to_string()))?;
                if kb.store().is_empty() {
                    tracing::warn!("knowledge store {} is empty; seeding it with the bundled corpus", path.display());
                    kb.ingest(&bundled_corpus(), ChunkOptions::default()).map_err(|e| ApiError::new(e.code(), e.to_string()))?;
                }
                kb
            }
            None => {
                let kb = KnowledgeBase::new(Arc::new(caseforge_core::knowledge_base::VectorStore::in_memory()), emb);
                kb.ingest(&bundled_corpus(), ChunkOptions::default()).map_err(|e| ApiError::new(e.code(), e.to_string()))?;
                kb
            }
        };
        let templates = match &config.template_dir {
            Some(dir) => TemplateStore::load_dir(dir).map_err(|e| ApiError::new(e.code(), e.to_string()))?,
            None => TemplateStore::bundled(),
        };
        for w in templates.warnings() {
            tracing::warn!("{w}");
        }
        let gateway = LlmGateway::new(RetryPolicy::default(), config.max_concurrency);
        let orchestrator = Orchestrator::new(Arc::new(kb), Arc::new(templates), Arc::new(gateway))
            .with_clock(clock.clone())
            .with_config(config.orchestrator.clone());
        let store = match &config.store_path {
            Some(p) => CaseStore::open(p)?,
            None => CaseStore::in_memory()?,
        }
        .with_clock(clock);
        let secrets = config.secret_values();
        Ok(App { config, orchestrator, store: Arc::new(store), secrets })
    }

    /// Scrubs configured secrets from an error before it leaves the process.
    pub fn scrub(&self, e: ApiError) -> ApiError {
        e.scrub(&self.secrets)
    }

    pub fn model(&self, name: Option<&str>) -> ApiResult<ModelSpec> {
        self.config.model(name).ok_or_else(|| {
            ApiError::new("unknown_model", format!("no provider named {:?}", name.unwrap_or(&self.config.default_model)))
        })
    }

    pub fn generate(&self, req: &CaseRequest) -> ApiResult<CaseResponse> {
        let mut g = GenerationRequest::new(&req.disorders, req.grade, &req.population_spec, self.model(req.model.as_deref())?);
        g.seed = req.seed;
        let generated = self.orchestrator.generate_case(&g)?;
        let validation = generated.validation.clone();
        let record = generated.into_record();
        self.store.save_case(&record)?;
        Ok(CaseResponse { record, validation })
    }

    /// Parses and validates a batch without generating anything.
    pub fn prepare_batch(&self, body: &BatchBody) -> ApiResult<PreparedBatch> {
        let given = [body.spec.is_some(), body.text.is_some(), body.roster.is_some()].iter().filter(|b| **b).count();
        if given != 1 {
            return Err(ApiError::bad_request("provide exactly one of spec, text or roster"));
        }
        let model = self.model(body.model.as_deref())?;
        if let Some(csv) = &body.roster {
            let out = parse_roster(csv.as_bytes(), &model)?;
            let requests: Vec<GenerationRequest> = out.requests.into_iter().map(|(_, r)| r).collect();
            return Ok(PreparedBatch {
                total: requests.len(),
                kind: PreparedKind::Requests(requests),
                warnings: Vec::new(),
                roster_errors: out.errors,
            });
        }
        let (mut spec, warnings) = match (&body.spec, &body.text) {
            (Some(spec), _) => (spec.clone(), Vec::new()),
            (_, Some(text)) => {
                let parsed = parse_natural_language_request(text, &self.config.orchestrator.nl_defaults)?;
                (parsed.spec, parsed.warnings)
            }
            _ => unreachable!("checked above"),
        };
        if body.seed.is_some() {
            spec.seed = body.seed;
        }
        spec.validate()?;
        Ok(PreparedBatch { total: spec.count, kind: PreparedKind::Spec(spec, model), warnings, roster_errors: Vec::new() })
    }

    /// Generates a prepared batch and stores every successful case.
    pub fn run_batch(&self, prepared: PreparedBatch) -> ApiResult<BatchReport> {
        let PreparedBatch { kind, total, mut warnings, roster_errors } = prepared;
        let outcome: BatchOutcome = match kind {
            PreparedKind::Spec(spec, model) => self.orchestrator.generate_batch(&spec, &model)?,
            PreparedKind::Requests(requests) if requests.is_empty() => {
                return Ok(BatchReport { seed: None, requested: 0, succeeded: 0, items: vec![], warnings, roster_errors });
            }
            PreparedKind::Requests(requests) => self.orchestrator.generate_requests(&requests)?,
        };
        warnings.extend(outcome.warnings.iter().cloned());
        let mut items = Vec::new();
        for item in outcome.items {
            let summary = match item.case {
                Some(case) => {
                    let record = case.into_record();
                    match self.store.save_case(&record) {
                        Ok(()) => BatchItemSummary { index: item.index, case_id: Some(record.case_id), error: None },
                        Err(e) => BatchItemSummary { index: item.index, case_id: None, error: Some(e.to_string()) },
                    }
                }
                None => BatchItemSummary {
                    index: item.index,
                    case_id: None,
                    error: item.error.map(|f| format!("{}: {}", f.code, f.message)),
                },
            };
            items.push(summary);
        }
        let succeeded = items.iter().filter(|i| i.case_id.is_some()).count();
        Ok(BatchReport { seed: outcome.seed, requested: total, succeeded, items, warnings, roster_errors })
    }

    pub fn search(&self, filter: &CaseFilter) -> ApiResult<Vec<CaseRecord>> {
        Ok(self.store.search_cases(filter)?)
    }

    pub fn case(&self, id: &str) -> ApiResult<CaseRecord> {
        Ok(self.store.load_case(id)?)
    }

    pub fn match_group(&self, req: &GroupRequest) -> ApiResult<GroupMatch> {
        Ok(self.orchestrator.match_group(&self.store, req)?)
    }

    pub fn plan_group(&self, body: &PlanBody) -> ApiResult<GroupPlan> {
        let members = body.member_ids.iter().map(|id| self.store.load_case(id)).collect::<Result<Vec<_>, _>>()?;
        let model = self.model(body.model.as_deref())?;
        Ok(self.orchestrator.synthesize_group_session(&members, &model)?)
    }

    fn scoring_context(record: &CaseRecord) -> ScoringContext {
        ScoringContext { disorders: record.disorders.clone(), grade: record.provenance.as_ref().map(|p| p.grade) }
    }

    /// Rubric score (stored, with automated error tags the first time), plus
    /// the LLM judge when `judge` names a provider.
    pub fn score(&self, id: &str, judge: Option<&str>) -> ApiResult<ScoreResponse> {
        let record = self.store.load_case(id)?;
        let ctx = App::scoring_context(&record);
        let score = score_case(&record.case, &ctx, &self.config.rubric);
        self.store.save_score(id, RULES_SCORER, &score)?;
        let has_auto = self.store.error_tags_for(id)?.iter().any(|t| t.source == TagSource::Automated);
        if !has_auto {
            for tag in tags_from_score(id, &score) {
                self.store.add_error_tag(&tag)?;
            }
        }
        let judge = match judge {
            None => None,
            Some(name) => {
                let spec = self.model(Some(name))?;
                let out = llm_judge(self.orchestrator.gateway(), &spec, &record.case, &ctx)?;
                self.store.save_score(id, spec.key(), &out.score)?;
                Some(JudgeResult {
                    model: spec.key().to_string(),
                    overall: out.score.overall(),
                    score: out.score,
                    justifications: out.justifications,
                    warnings: out.warnings,
                })
            }
        };
        Ok(ScoreResponse { case_id: id.to_string(), overall: score.overall(), score, judge })
    }

    pub fn feedback(&self, id: &str, body: &FeedbackBody) -> ApiResult<FeedbackResponse> {
        let feedback_id = self.store.save_feedback(&FeedbackRecord {
            feedback_id: 0,
            case_id: id.to_string(),
            reviewer_id: body.reviewer_id.clone(),
            ratings: body.ratings,
            free_text: body.free_text.clone(),
            created_at: None,
        })?;
        let mut tag_ids = Vec::new();
        for t in &body.error_tags {
            let mut tag = ErrorTag::new(id, t.category, TagSource::Reviewer);
            tag.severe = t.severe;
            tag_ids.push(self.store.add_error_tag(&tag)?);
        }
        Ok(FeedbackResponse { feedback_id, tag_ids })
    }

    pub fn analyze(&self, body: &AnalyzeBody) -> ApiResult<AnalyzeResponse> {
        let transcript = match (&body.utterances, &body.jsonl) {
            (Some(u), None) => Transcript { utterances: u.clone(), source: "manual".into() },
            (None, Some(raw)) => Transcript::from_jsonl(raw)?,
            _ => return Err(ApiError::bad_request("provide exactly one of utterances or jsonl")),
        };
        transcript.validate()?;
        let (transcript, replacements) = if body.deidentify {
            let (t, n) = transcript.deidentified();
            (t, Some(n))
        } else {
            (transcript, None)
        };
        let mut opts = DisfluencyOptions::default();
        if let Some(p) = body.pause_threshold_s {
            opts.pause_threshold_s = p;
        }
        let report = analyze_transcript(&transcript, &body.lexicon, &opts)?;
        let clinical = match &body.clinical_model {
            None => None,
            Some(name) => Some(analyze_clinical(&report, self.orchestrator.gateway(), &self.model(Some(name))?)?),
        };
        Ok(AnalyzeResponse { report, replacements, clinical })
    }

    pub fn quality_report(&self, group_by: GroupBy, scorer: Option<&str>) -> ApiResult<Vec<AggregateReport>> {
        Ok(self.store.quality_report(scorer.unwrap_or(RULES_SCORER), group_by)?)
    }

    pub fn error_report(&self, filter: &ReportFilter) -> ApiResult<ErrorReport> {
        Ok(self.store.error_report(filter)?)
    }

    pub fn export(&self, id: &str, format: &str) -> ApiResult<(ExportFormat, Vec<u8>)> {
        let format: ExportFormat = format.parse()?;
        let record = self.store.load_case(id)?;
        Ok((format, export_case(&record.case, format)?))
    }

    pub fn ingest(&self, manifest: &Path) -> ApiResult<IngestSummary> {
        let docs = load_manifest(manifest).map_err(|e| ApiError::new(e.code(), e.to_string()))?;
        self.orchestrator
            .knowledge_base()
            .ingest(&docs, ChunkOptions::default())
            .map_err(|e| ApiError::new(e.code(), e.to_string()))
    }
}
