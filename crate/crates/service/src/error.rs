use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use caseforge_core::orchestrator::OrchestratorError;
use caseforge_core::persistence::StoreError;
use caseforge_core::quality::QualityError;
use caseforge_core::transcript::TranscriptError;
use serde::{Deserialize, Serialize};

use crate::export::ExportError;

/// Error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    pub correlation_id: String,
}

/// HTTP status for a machine code.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "not_found" | "unknown_case" | "unknown_job" | "unknown_model" => StatusCode::NOT_FOUND,
        "duplicate_case" | "case_has_dependents" => StatusCode::CONFLICT,
        "overloaded" => StatusCode::SERVICE_UNAVAILABLE,
        "auth_failure" | "rate_limited" | "timeout" | "provider_error" | "provider_unreachable"
        | "generation_failed_after_retries" | "all_cases_failed" | "judge_unparseable" | "analysis_unparseable"
        | "plan_incomplete" => StatusCode::BAD_GATEWAY,
        "unauthorized" => StatusCode::UNAUTHORIZED,
        "storage_io" | "corrupt_store" | "io_error" | "internal" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status_for(code).as_u16(),
            code: code.to_string(),
            message: message.into(),
            correlation_id: uuid::Uuid::new_v4().to_string(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new("invalid_request", message)
    }

    /// Replaces any configured secret that leaked into the message.
    pub fn scrub(mut self, secrets: &[String]) -> Self {
        for s in secrets {
            self.message = self.message.replace(s.as_str(), "[redacted]");
        }
        self
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        if status.is_server_error() {
            tracing::error!(code = %self.code, correlation_id = %self.correlation_id, "{}", self.message);
        }
        (status, Json(self)).into_response()
    }
}

macro_rules! from_coded {
    ($($t:ty),*) => {
        $(impl From<$t> for ApiError {
            fn from(e: $t) -> Self {
                ApiError::new(e.code(), e.to_string())
            }
        })*
    };
}

from_coded!(OrchestratorError, StoreError, QualityError, TranscriptError, ExportError);
