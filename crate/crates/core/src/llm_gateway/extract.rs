use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::RawCompletion;
use crate::case_model::REQUIRED_KEYS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionStatus {
    Ok,
    StructuralIncomplete,
    NotJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOutcome {
    pub status: ExtractionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    pub diagnostics: String,
}

impl ExtractionOutcome {
    fn not_json(diagnostics: impl Into<String>) -> Self {
        ExtractionOutcome { status: ExtractionStatus::NotJson, payload: None, diagnostics: diagnostics.into() }
    }
}

/// Byte range of the balanced object starting at `start` (which must be `{`),
/// honouring string literals and escapes. `None` if the text ends first.
fn balanced_end(text: &str, start: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// Body of the first fenced code block, if the text has one.
fn fenced_body(text: &str) -> Option<&str> {
    let open = text.find("```")?;
    let after = &text[open + 3..];
    let body_start = after.find('\n').map_or(0, |i| i + 1);
    let body = &after[body_start..];
    Some(body.find("```").map_or(body, |close| &body[..close]))
}

fn classify(obj: Value, repaired: bool) -> ExtractionOutcome {
    let Value::Object(map) = &obj else {
        return ExtractionOutcome::not_json("top-level value is not an object");
    };
    let missing: Vec<&str> = REQUIRED_KEYS.iter().copied().filter(|k| !map.contains_key(*k)).collect();
    let note = if repaired { "repaired: surrounding prose or fences removed" } else { "" };
    if missing.is_empty() {
        ExtractionOutcome { status: ExtractionStatus::Ok, payload: Some(obj), diagnostics: note.to_string() }
    } else {
        let mut diagnostics = format!("missing required keys: {}", missing.join(", "));
        if repaired {
            diagnostics = format!("{diagnostics}; {note}");
        }
        ExtractionOutcome { status: ExtractionStatus::StructuralIncomplete, payload: Some(obj), diagnostics }
    }
}

/// Finds the object to parse: the whole trimmed text if it is JSON,
/// otherwise the outermost balanced object after dropping fences and prose.
/// The flag reports whether the repair pass was needed.
fn locate(text: &str) -> Result<(Value, bool), &'static str> {
    if let Ok(v) = serde_json::from_str::<Value>(text.trim()) {
        return Ok((v, false));
    }
    let region = fenced_body(text).filter(|b| b.contains('{')).unwrap_or(text);
    let mut search_from = 0;
    while let Some(offset) = region[search_from..].find('{') {
        let start = search_from + offset;
        let end = balanced_end(region, start).ok_or("no balanced JSON object: output appears truncated")?;
        if let Ok(v) = serde_json::from_str::<Value>(&region[start..end]) {
            return Ok((v, true));
        }
        search_from = end;
    }
    Err("no JSON object found")
}

/// First JSON object in free text, for callers that have no key requirements.
pub(crate) fn first_json_object(text: &str) -> Option<Value> {
    locate(text).ok().map(|(v, _)| v).filter(Value::is_object)
}

/// Parses the case object out of raw model output with a single repair pass:
/// fences and surrounding prose are dropped and the outermost balanced
/// object is parsed as-is.
pub fn extract_json(raw: &RawCompletion) -> ExtractionOutcome {
    extract_json_text(&raw.text)
}

pub fn extract_json_text(text: &str) -> ExtractionOutcome {
    match locate(text) {
        Ok((v, repaired)) => classify(v, repaired),
        Err(msg) => ExtractionOutcome::not_json(msg),
    }
}
