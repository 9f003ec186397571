use std::fmt::Write as _;
use std::str::FromStr;

use caseforge_core::case_model::CaseFile;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("unknown export format {0:?}; expected canonical_json, csv_flat or printable_text")]
    UnknownFormat(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl ExportError {
    pub fn code(&self) -> &'static str {
        match self {
            ExportError::UnknownFormat(_) => "unknown_format",
            ExportError::Csv(_) => "internal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    CanonicalJson,
    CsvFlat,
    PrintableText,
}

impl FromStr for ExportFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "canonical_json" | "json" => Ok(ExportFormat::CanonicalJson),
            "csv_flat" | "csv" => Ok(ExportFormat::CsvFlat),
            "printable_text" | "text" | "txt" => Ok(ExportFormat::PrintableText),
            _ => Err(ExportError::UnknownFormat(s.to_string())),
        }
    }
}

impl ExportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::CanonicalJson => "application/json",
            ExportFormat::CsvFlat => "text/csv; charset=utf-8",
            ExportFormat::PrintableText => "text/plain; charset=utf-8",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::CanonicalJson => "json",
            ExportFormat::CsvFlat => "csv",
            ExportFormat::PrintableText => "txt",
        }
    }
}

/// Column set of the flat CSV export. Cells that do not apply to a row stay empty.
pub const CSV_COLUMNS: [&str; 19] = [
    "section",
    "item",
    "name",
    "age",
    "grade",
    "gender",
    "text",
    "assessment_name",
    "domain",
    "standard_score",
    "percentile",
    "severity",
    "goal_number",
    "goal_brief",
    "goal_annual",
    "date",
    "duration",
    "setting",
    "goal_addressed",
];

fn opt(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_flat(case: &CaseFile) -> Result<Vec<u8>, ExportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    let mut row = |section: &str, item: usize, cells: &[(&str, String)]| -> Result<(), csv::Error> {
        let record: Vec<String> = CSV_COLUMNS
            .iter()
            .map(|col| match *col {
                "section" => section.to_string(),
                "item" => item.to_string(),
                _ => cells.iter().find(|(c, _)| c == col).map(|(_, v)| v.clone()).unwrap_or_default(),
            })
            .collect();
        w.write_record(&record)
    };
    row(
        "demographics",
        1,
        &[
            ("name", case.name.clone()),
            ("age", opt(case.age)),
            ("grade", case.grade.clone()),
            ("gender", case.gender.clone()),
        ],
    )?;
    row("background", 1, &[("text", case.background.clone())])?;
    for (i, a) in case.assessment_results.iter().enumerate() {
        row(
            "assessment_results",
            i + 1,
            &[
                ("assessment_name", a.assessment_name.clone()),
                ("domain", a.domain.clone()),
                ("standard_score", opt(a.standard_score)),
                ("percentile", opt(a.percentile)),
                ("severity", a.severity.clone()),
            ],
        )?;
    }
    for (i, g) in case.annual_goals.iter().enumerate() {
        row(
            "annual_goals",
            i + 1,
            &[
                ("goal_number", opt(g.goal_number)),
                ("goal_brief", g.goal_brief.clone()),
                ("goal_annual", g.goal_annual.clone()),
            ],
        )?;
    }
    for (i, n) in case.session_notes.iter().enumerate() {
        row(
            "session_notes",
            i + 1,
            &[
                ("date", n.date.clone()),
                ("duration", n.duration.clone()),
                ("setting", n.setting.clone()),
                ("goal_addressed", n.goal_addressed.clone()),
                ("text", n.note.clone()),
            ],
        )?;
    }
    w.into_inner().map_err(|e| ExportError::Csv(e.into_error().into()))
}

fn heading(out: &mut String, title: &str) {
    let _ = writeln!(out, "\n{title}\n{}", "=".repeat(title.chars().count()));
}

fn printable_text(case: &CaseFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "STUDENT CASE FILE: {}", case.name);
    heading(&mut out, "Demographics");
    let age = case.age.map(|a| a.to_string()).unwrap_or_else(|| "not stated".into());
    let _ = writeln!(out, "Name: {}\nAge: {age}\nGrade: {}\nGender: {}", case.name, case.grade, case.gender);
    heading(&mut out, "Background");
    let _ = writeln!(out, "{}", case.background.trim());
    heading(&mut out, "Assessment Results");
    for a in &case.assessment_results {
        let _ = writeln!(
            out,
            "- {} ({}): standard score {}, percentile {}, severity {}",
            a.assessment_name,
            a.domain,
            a.standard_score.map_or("n/a".into(), |v| v.to_string()),
            a.percentile.map_or("n/a".into(), |v| v.to_string()),
            a.severity
        );
    }
    heading(&mut out, "Annual Goals");
    for g in &case.annual_goals {
        let n = g.goal_number.map_or("-".into(), |v| v.to_string());
        let _ = writeln!(out, "Goal {n}: {}\n  {}", g.goal_brief, g.goal_annual);
    }
    heading(&mut out, "Session Notes");
    for (i, s) in case.session_notes.iter().enumerate() {
        let _ = writeln!(
            out,
            "Session {} | {} | {} | {} | Goal addressed: {}\n  {}",
            i + 1,
            s.date,
            s.duration,
            s.setting,
            s.goal_addressed,
            s.note.trim()
        );
    }
    out
}

pub fn export_case(case: &CaseFile, format: ExportFormat) -> Result<Vec<u8>, ExportError> {
    match format {
        ExportFormat::CanonicalJson => Ok(case.to_canonical_json().into_bytes()),
        ExportFormat::CsvFlat => csv_flat(case),
        ExportFormat::PrintableText => Ok(printable_text(case).into_bytes()),
    }
}
