use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GenerationRequest, OrchestratorError};
use crate::case_model::{DisorderType, GradeLevel, Severity};
use crate::llm_gateway::{ModelSpec, PopulationFields};

const REQUIRED: [&str; 2] = ["grade", "disorder1"];

/// A row that could not become a request. `row` counts data rows from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterRowError {
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterOutcome {
    pub requests: Vec<(usize, GenerationRequest)>,
    pub errors: Vec<RosterRowError>,
}

fn parse_row(get: impl Fn(&str) -> Option<String>, model: &ModelSpec) -> Result<GenerationRequest, String> {
    let grade_text = get("grade").ok_or("missing grade")?;
    let grade: GradeLevel = grade_text.parse().map_err(|e: crate::case_model::UnknownGrade| e.to_string())?;
    let mut disorders = Vec::new();
    for col in ["disorder1", "disorder2"] {
        if let Some(text) = get(col) {
            let d: DisorderType = text.parse().map_err(|e: crate::case_model::UnknownDisorder| e.to_string())?;
            if !disorders.contains(&d) {
                disorders.push(d);
            }
        }
    }
    if disorders.is_empty() {
        return Err("missing disorder1".into());
    }
    let severity = match get("severity") {
        Some(s) => Some(Severity::parse(&s).ok_or_else(|| format!("unknown severity {s:?}"))?),
        None => None,
    };
    let population = PopulationFields {
        name: get("name"),
        gender: get("gender"),
        severity,
        background: get("background"),
        setting: None,
    };
    Ok(GenerationRequest::new(&disorders, grade, &population.render(), model.clone()))
}

/// Reads a header-led CSV roster. Bad rows are collected and skipped.
pub fn parse_roster<R: Read>(reader: R, model: &ModelSpec) -> Result<RosterOutcome, OrchestratorError> {
    let mut csv = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = csv
        .headers()
        .map_err(|e| OrchestratorError::Roster(e.to_string()))?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    for col in REQUIRED {
        if !headers.iter().any(|h| h == col) {
            return Err(OrchestratorError::MissingRequiredColumn(col.to_string()));
        }
    }
    let mut out = RosterOutcome { requests: Vec::new(), errors: Vec::new() };
    let mut rows = 0;
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                out.errors.push(RosterRowError { row, message: e.to_string() });
                continue;
            }
        };
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows += 1;
        let get = |col: &str| {
            let idx = headers.iter().position(|h| h == col)?;
            record.get(idx).filter(|v| !v.is_empty()).map(str::to_string)
        };
        match parse_row(get, model) {
            Ok(req) => out.requests.push((row, req)),
            Err(message) => out.errors.push(RosterRowError { row, message }),
        }
    }
    if rows == 0 && out.errors.is_empty() {
        return Err(OrchestratorError::EmptyRoster);
    }
    Ok(out)
}

pub fn load_roster(path: &Path, model: &ModelSpec) -> Result<RosterOutcome, OrchestratorError> {
    let file = std::fs::File::open(path).map_err(|e| OrchestratorError::Roster(format!("{}: {e}", path.display())))?;
    parse_roster(file, model)
}
