use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use caseforge_core::orchestrator::GroupRequest;
use caseforge_core::persistence::ReportFilter;
use serde::Deserialize;
use serde_json::json;

use crate::app::{parse_group_by, AnalyzeBody, App, BatchBody, CaseQuery, CaseRequest, FeedbackBody, PlanBody};
use crate::error::ApiError;
use crate::jobs::JobQueue;

#[derive(Clone)]
pub struct ApiState {
    pub app: Arc<App>,
    pub jobs: JobQueue,
    token: Option<String>,
}

impl ApiState {
    /// Batch jobs run one at a time; each batch already fans out over the
    /// orchestrator worker pool.
    pub fn new(app: Arc<App>) -> Self {
        let token = app.config.api_token_env.as_deref().and_then(|v| std::env::var(v).ok()).filter(|t| !t.is_empty());
        ApiState { app, jobs: JobQueue::new(1), token }
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs a synchronous App operation on the blocking pool and scrubs its error.
async fn blocking<T, F>(state: &ApiState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&App) -> ApiResult<T> + Send + 'static,
{
    let app = state.app.clone();
    let out = tokio::task::spawn_blocking(move || f(&app))
        .await
        .unwrap_or_else(|e| Err(ApiError::new("internal", format!("worker panicked: {e}"))));
    out.map_err(|e| state.app.scrub(e))
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

async fn create_case(State(s): State<ApiState>, body: Bytes) -> ApiResult<Response> {
    let req: CaseRequest = parse_json(&body)?;
    let out = blocking(&s, move |app| app.generate(&req)).await?;
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

async fn list_cases(State(s): State<ApiState>, Query(q): Query<CaseQuery>) -> ApiResult<Response> {
    let filter = q.to_filter()?;
    let out = blocking(&s, move |app| app.search(&filter)).await?;
    Ok(Json(out).into_response())
}

async fn get_case(State(s): State<ApiState>, Path(id): Path<String>) -> ApiResult<Response> {
    let out = blocking(&s, move |app| app.case(&id)).await?;
    Ok(Json(out).into_response())
}

#[derive(Deserialize)]
struct FormatQuery {
    format: Option<String>,
}

async fn export(State(s): State<ApiState>, Path(id): Path<String>, Query(q): Query<FormatQuery>) -> ApiResult<Response> {
    let format = q.format.unwrap_or_else(|| "canonical_json".into());
    let (fmt, bytes) = blocking(&s, move |app| app.export(&id, &format)).await?;
    Ok(([(header::CONTENT_TYPE, fmt.content_type())], bytes).into_response())
}

async fn create_batch(State(s): State<ApiState>, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let is_csv = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("text/csv"));
    let req: BatchBody = if is_csv {
        let text = String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("roster is not UTF-8"))?;
        BatchBody { roster: Some(text), ..BatchBody::default() }
    } else {
        parse_json(&body)?
    };
    let prepared = blocking(&s, move |app| app.prepare_batch(&req)).await?;
    let total = prepared.total;
    let job_id = s.jobs.submit(s.app.clone(), prepared);
    Ok((StatusCode::ACCEPTED, Json(json!({"job_id": job_id, "total": total}))).into_response())
}

async fn get_job(State(s): State<ApiState>, Path(id): Path<String>) -> ApiResult<Response> {
    let job = s.jobs.get(&id).ok_or_else(|| ApiError::new("unknown_job", format!("no job {id}")))?;
    Ok(Json(job).into_response())
}

async fn match_group(State(s): State<ApiState>, body: Bytes) -> ApiResult<Response> {
    let req: GroupRequest = parse_json(&body)?;
    let out = blocking(&s, move |app| app.match_group(&req)).await?;
    Ok(Json(out).into_response())
}

async fn plan_group(State(s): State<ApiState>, body: Bytes) -> ApiResult<Response> {
    let req: PlanBody = parse_json(&body)?;
    let out = blocking(&s, move |app| app.plan_group(&req)).await?;
    Ok(Json(out).into_response())
}

#[derive(Deserialize)]
struct JudgeQuery {
    judge: Option<String>,
}

async fn score(State(s): State<ApiState>, Path(id): Path<String>, Query(q): Query<JudgeQuery>) -> ApiResult<Response> {
    let out = blocking(&s, move |app| app.score(&id, q.judge.as_deref())).await?;
    Ok(Json(out).into_response())
}

async fn feedback(State(s): State<ApiState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: FeedbackBody = parse_json(&body)?;
    let out = blocking(&s, move |app| app.feedback(&id, &req)).await?;
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

async fn analyze(State(s): State<ApiState>, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let is_jsonl = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/x-ndjson") || v.starts_with("application/jsonl"));
    let req: AnalyzeBody = if is_jsonl {
        let text = String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("transcript is not UTF-8"))?;
        AnalyzeBody { jsonl: Some(text), ..AnalyzeBody::default() }
    } else {
        parse_json(&body)?
    };
    let out = blocking(&s, move |app| app.analyze(&req)).await?;
    Ok(Json(out).into_response())
}

#[derive(Deserialize)]
struct QualityQuery {
    group_by: Option<String>,
    scorer: Option<String>,
}

async fn quality_report(State(s): State<ApiState>, Query(q): Query<QualityQuery>) -> ApiResult<Response> {
    let group_by = parse_group_by(q.group_by.as_deref())?;
    let out = blocking(&s, move |app| app.quality_report(group_by, q.scorer.as_deref())).await?;
    Ok(Json(out).into_response())
}

#[derive(Deserialize)]
struct ErrorQuery {
    model: Option<String>,
    disorder: Option<String>,
    since: Option<String>,
    until: Option<String>,
    group_by: Option<String>,
}

fn parse_instant(s: &Option<String>) -> ApiResult<Option<chrono::DateTime<chrono::Utc>>> {
    s.as_deref()
        .map(|t| {
            chrono::DateTime::parse_from_rfc3339(t)
                .map(|d| d.with_timezone(&chrono::Utc))
                .map_err(|e| ApiError::bad_request(format!("invalid timestamp {t:?}: {e}")))
        })
        .transpose()
}

async fn error_report(State(s): State<ApiState>, Query(q): Query<ErrorQuery>) -> ApiResult<Response> {
    let filter = ReportFilter {
        model_id: q.model.clone(),
        disorder: q
            .disorder
            .as_deref()
            .map(|d| d.parse().map_err(|e: caseforge_core::case_model::UnknownDisorder| ApiError::bad_request(e.to_string())))
            .transpose()?,
        since: parse_instant(&q.since)?,
        until: parse_instant(&q.until)?,
        group_by: parse_group_by(q.group_by.as_deref())?,
    };
    let out = blocking(&s, move |app| app.error_report(&filter)).await?;
    Ok(Json(out).into_response())
}

async fn auth(State(s): State<ApiState>, req: Request, next: Next) -> Response {
    if let Some(token) = &s.token {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == token);
        if !ok && req.uri().path() != "/health" {
            return ApiError::new("unauthorized", "missing or invalid bearer token").into_response();
        }
    }
    next.run(req).await
}

pub fn router(state: ApiState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/cases", post(create_case).get(list_cases))
        .route("/cases/{id}", get(get_case))
        .route("/cases/{id}/export", get(export))
        .route("/cases/{id}/score", post(score))
        .route("/cases/{id}/feedback", post(feedback))
        .route("/batches", post(create_batch))
        .route("/jobs/{id}", get(get_job))
        .route("/groups/match", post(match_group))
        .route("/groups/plan", post(plan_group))
        .route("/transcripts/analyze", post(analyze))
        .route("/reports/quality", get(quality_report))
        .route("/reports/errors", get(error_report))
        .layer(middleware::from_fn_with_state(state.clone(), auth))
        .with_state(state)
}

pub async fn serve(app: Arc<App>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(ApiState::new(app)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
