//! Single-file SQLite store for cases, provenance, reviewer feedback, error
//! tags and grammar findings.

mod archive;
mod grammar;
mod report;
mod scores;

use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, Utc};
use rusqlite::{params, Connection, OptionalExtension};
use serde::{Deserialize, Serialize};

pub use grammar::{grammar_check, GrammarIssue, GrammarKind};
pub use archive::{ArchiveCounts, ArchiveEntry};
pub use scores::{StoredScore, RULES_SCORER};
pub use report::{CategoryCounts, ErrorReport, GroupBy, ReportFilter};

use crate::case_model::{CaseFile, DisorderType, GradeLevel, Severity};
use crate::orchestrator::{format_timestamp, Clock, Provenance, SystemClock};
use crate::quality::{ErrorCategory, QualityScore};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("case {0} not found")]
    NotFound(String),
    #[error("case {0} does not exist")]
    UnknownCase(String),
    #[error("case {0} already exists")]
    DuplicateCase(String),
    #[error("{field} rating {value} is outside 1-5")]
    RatingOutOfRange { field: &'static str, value: i64 },
    #[error("case {0} still has feedback, error tags or grammar findings")]
    HasDependents(String),
    #[error("stored row is corrupt: {0}")]
    Corrupt(String),
    #[error("archive line {line}: {message}")]
    InvalidArchive { line: usize, message: String },
    #[error("storage error: {0}")]
    Sqlite(#[from] rusqlite::Error),
    #[error("storage i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::NotFound(_) => "not_found",
            StoreError::UnknownCase(_) => "unknown_case",
            StoreError::DuplicateCase(_) => "duplicate_case",
            StoreError::RatingOutOfRange { .. } => "rating_out_of_range",
            StoreError::HasDependents(_) => "case_has_dependents",
            StoreError::Corrupt(_) | StoreError::InvalidArchive { .. } => "corrupt_store",
            StoreError::Sqlite(_) | StoreError::Io(_) => "storage_io",
        }
    }
}

pub type StoreResult<T> = Result<T, StoreError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: String,
    pub case: CaseFile,
    /// Target disorders; kept apart from the case so search works for
    /// imported cases that have no provenance.
    pub disorders: Vec<DisorderType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub created_at: DateTime<Utc>,
}

impl CaseRecord {
    pub fn model_id(&self) -> &str {
        self.provenance.as_ref().map_or("unknown", |p| p.model_id.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratings {
    pub clinical_accuracy: i64,
    pub documentation_quality: i64,
    pub educational_utility: i64,
    pub cultural_appropriateness: i64,
}

impl Ratings {
    fn check(&self) -> StoreResult<()> {
        for (field, value) in [
            ("clinical_accuracy", self.clinical_accuracy),
            ("documentation_quality", self.documentation_quality),
            ("educational_utility", self.educational_utility),
            ("cultural_appropriateness", self.cultural_appropriateness),
        ] {
            if !(1..=5).contains(&value) {
                return Err(StoreError::RatingOutOfRange { field, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    /// Assigned by the store; ignored on insert.
    #[serde(default)]
    pub feedback_id: i64,
    pub case_id: String,
    /// Free-text reviewer identifier.
    pub reviewer_id: String,
    pub ratings: Ratings,
    #[serde(default)]
    pub free_text: String,
    /// Set by the store clock on insert when absent.
    #[serde(default)]
    pub created_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagSource {
    Automated,
    Reviewer,
}

impl TagSource {
    fn as_str(self) -> &'static str {
        match self {
            TagSource::Automated => "automated",
            TagSource::Reviewer => "reviewer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTag {
    #[serde(default)]
    pub tag_id: i64,
    pub case_id: String,
    pub category: ErrorCategory,
    #[serde(default)]
    pub severe: bool,
    pub source: TagSource,
    #[serde(default)]
    pub created_at: Option<DateTime<Utc>>,
}

impl ErrorTag {
    pub fn new(case_id: &str, category: ErrorCategory, source: TagSource) -> Self {
        ErrorTag { tag_id: 0, case_id: case_id.to_string(), category, severe: false, source, created_at: None }
    }
}

/// Automated tags for every categorised issue in a rule score, one per category.
pub fn tags_from_score(case_id: &str, score: &QualityScore) -> Vec<ErrorTag> {
    let mut cats: Vec<ErrorCategory> = score.issues.iter().filter_map(|i| i.category).collect();
    cats.sort_by_key(|c| c.as_str());
    cats.dedup();
    cats.into_iter().map(|c| ErrorTag::new(case_id, c, TagSource::Automated)).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseFilter {
    pub disorder: Option<DisorderType>,
    pub grade_min: Option<GradeLevel>,
    pub grade_max: Option<GradeLevel>,
    pub severity: Option<Severity>,
    pub model_id: Option<String>,
}

impl CaseFilter {
    /// In-memory form of the filter, shared by the SQL path's tests.
    pub fn accepts(&self, r: &CaseRecord) -> bool {
        let grade = r.case.grade_level().map(|g| g.index());
        self.disorder.is_none_or(|d| r.disorders.contains(&d))
            && self.grade_min.is_none_or(|g| grade.is_some_and(|x| x >= g.index()))
            && self.grade_max.is_none_or(|g| grade.is_some_and(|x| x <= g.index()))
            && self.severity.is_none_or(|s| r.case.severity() == Some(s))
            && self.model_id.as_ref().is_none_or(|m| r.model_id() == m)
    }
}

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS cases (
    case_id TEXT PRIMARY KEY,
    case_json TEXT NOT NULL,
    provenance_json TEXT,
    grade_index INTEGER,
    severity TEXT,
    model_id TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS case_disorders (
    case_id TEXT NOT NULL REFERENCES cases(case_id) ON DELETE CASCADE,
    position INTEGER NOT NULL,
    disorder TEXT NOT NULL,
    PRIMARY KEY (case_id, position)
);
CREATE TABLE IF NOT EXISTS feedback (
    feedback_id INTEGER PRIMARY KEY AUTOINCREMENT,
    case_id TEXT NOT NULL REFERENCES cases(case_id) ON DELETE RESTRICT,
    reviewer_id TEXT NOT NULL,
    clinical_accuracy INTEGER NOT NULL CHECK (clinical_accuracy BETWEEN 1 AND 5),
    documentation_quality INTEGER NOT NULL CHECK (documentation_quality BETWEEN 1 AND 5),
    educational_utility INTEGER NOT NULL CHECK (educational_utility BETWEEN 1 AND 5),
    cultural_appropriateness INTEGER NOT NULL CHECK (cultural_appropriateness BETWEEN 1 AND 5),
    free_text TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS error_tags (
    tag_id INTEGER PRIMARY KEY AUTOINCREMENT,
    case_id TEXT NOT NULL REFERENCES cases(case_id) ON DELETE RESTRICT,
    category TEXT NOT NULL,
    severe INTEGER NOT NULL,
    source TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS grammar_issues (
    issue_id INTEGER PRIMARY KEY AUTOINCREMENT,
    case_id TEXT NOT NULL REFERENCES cases(case_id) ON DELETE RESTRICT,
    field_path TEXT NOT NULL,
    kind TEXT NOT NULL,
    span_start INTEGER NOT NULL,
    span_end INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS quality_scores (
    case_id TEXT NOT NULL REFERENCES cases(case_id) ON DELETE CASCADE,
    scorer TEXT NOT NULL,
    score_json TEXT NOT NULL,
    created_at TEXT NOT NULL,
    PRIMARY KEY (case_id, scorer)
);
CREATE INDEX IF NOT EXISTS cases_order ON cases(created_at, case_id);
CREATE INDEX IF NOT EXISTS disorder_lookup ON case_disorders(disorder);
";

/// Store handle. A single connection behind a mutex serialises writes;
/// clone the `Arc` to share it between threads.
pub struct CaseStore {
    conn: Mutex<Connection>,
    clock: Arc<dyn Clock>,
}

pub type CaseStoreHandle = Arc<CaseStore>;

fn disorder_key(d: DisorderType) -> String {
    serde_json::to_value(d).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn parse_time(s: &str) -> StoreResult<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| StoreError::Corrupt(format!("timestamp {s:?}: {e}")))
}

impl CaseStore {
    pub fn open(path: &Path) -> StoreResult<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        CaseStore::init(Connection::open(path)?)
    }

    pub fn in_memory() -> StoreResult<Self> {
        CaseStore::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> StoreResult<Self> {
        conn.pragma_update(None, "foreign_keys", true)?;
        conn.execute_batch(SCHEMA)?;
        Ok(CaseStore { conn: Mutex::new(conn), clock: Arc::new(SystemClock) })
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    fn lock(&self) -> MutexGuard<'_, Connection> {
        self.conn.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub fn save_case(&self, record: &CaseRecord) -> StoreResult<()> {
        let mut conn = self.lock();
        let tx = conn.transaction()?;
        let exists: bool = tx
            .query_row("SELECT 1 FROM cases WHERE case_id = ?1", [&record.case_id], |_| Ok(true))
            .optional()?
            .unwrap_or(false);
        if exists {
            return Err(StoreError::DuplicateCase(record.case_id.clone()));
        }
        let provenance = record.provenance.as_ref().map(|p| serde_json::to_string(p).expect("provenance serializes"));
        tx.execute(
            "INSERT INTO cases (case_id, case_json, provenance_json, grade_index, severity, model_id, created_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
            params![
                record.case_id,
                record.case.to_canonical_json(),
                provenance,
                record.case.grade_level().map(|g| g.index() as i64),
                record.case.severity().map(Severity::as_str),
                record.model_id(),
                format_timestamp(&record.created_at),
            ],
        )?;
        for (i, d) in record.disorders.iter().enumerate() {
            tx.execute(
                "INSERT INTO case_disorders (case_id, position, disorder) VALUES (?1, ?2, ?3)",
                params![record.case_id, i as i64, disorder_key(*d)],
            )?;
        }
        tx.commit()?;
        Ok(())
    }

    fn disorders_of(conn: &Connection, case_id: &str) -> StoreResult<Vec<DisorderType>> {
        let mut stmt = conn.prepare_cached("SELECT disorder FROM case_disorders WHERE case_id = ?1 ORDER BY position")?;
        let keys = stmt.query_map([case_id], |r| r.get::<_, String>(0))?.collect::<Result<Vec<_>, _>>()?;
        keys.iter().map(|k| k.parse().map_err(|_| StoreError::Corrupt(format!("disorder {k:?}")))).collect()
    }

    fn record_from_row(conn: &Connection, row: (String, String, Option<String>, String)) -> StoreResult<CaseRecord> {
        let (case_id, case_json, provenance_json, created_at) = row;
        let case = CaseFile::from_json(&case_json).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        let provenance = provenance_json
            .map(|p| serde_json::from_str(&p).map_err(|e| StoreError::Corrupt(e.to_string())))
            .transpose()?;
        let disorders = CaseStore::disorders_of(conn, &case_id)?;
        Ok(CaseRecord { case_id, case, disorders, provenance, created_at: parse_time(&created_at)? })
    }

    pub fn load_case(&self, case_id: &str) -> StoreResult<CaseRecord> {
        let conn = self.lock();
        let row = conn
            .query_row(
                "SELECT case_id, case_json, provenance_json, created_at FROM cases WHERE case_id = ?1",
                [case_id],
                |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?)),
            )
            .optional()?
            .ok_or_else(|| StoreError::NotFound(case_id.to_string()))?;
        CaseStore::record_from_row(&conn, row)
    }

    pub fn case_exists(&self, case_id: &str) -> StoreResult<bool> {
        let conn = self.lock();
        Ok(conn.query_row("SELECT 1 FROM cases WHERE case_id = ?1", [case_id], |_| Ok(())).optional()?.is_some())
    }

    pub fn count_cases(&self) -> StoreResult<usize> {
        let n: i64 = self.lock().query_row("SELECT COUNT(*) FROM cases", [], |r| r.get(0))?;
        Ok(n as usize)
    }

    /// Records matching every provided filter, ordered by (created_at, case_id).
    pub fn search_cases(&self, filter: &CaseFilter) -> StoreResult<Vec<CaseRecord>> {
        let mut sql = String::from("SELECT case_id, case_json, provenance_json, created_at FROM cases c WHERE 1=1");
        let mut args: Vec<rusqlite::types::Value> = Vec::new();
        if let Some(d) = filter.disorder {
            sql.push_str(" AND EXISTS (SELECT 1 FROM case_disorders x WHERE x.case_id = c.case_id AND x.disorder = ?)");
            args.push(disorder_key(d).into());
        }
        if let Some(g) = filter.grade_min {
            sql.push_str(" AND grade_index >= ?");
            args.push((g.index() as i64).into());
        }
        if let Some(g) = filter.grade_max {
            sql.push_str(" AND grade_index <= ?");
            args.push((g.index() as i64).into());
        }
        if let Some(s) = filter.severity {
            sql.push_str(" AND severity = ?");
            args.push(s.as_str().to_string().into());
        }
        if let Some(m) = &filter.model_id {
            sql.push_str(" AND model_id = ?");
            args.push(m.clone().into());
        }
        sql.push_str(" ORDER BY created_at, case_id");
        let conn = self.lock();
        let rows = {
            let mut stmt = conn.prepare(&sql)?;
            let rows = stmt
                .query_map(rusqlite::params_from_iter(args), |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?)))?
                .collect::<Result<Vec<_>, _>>()?;
            rows
        };
        rows.into_iter().map(|row| CaseStore::record_from_row(&conn, row)).collect()
    }

    pub fn all_cases(&self) -> StoreResult<Vec<CaseRecord>> {
        self.search_cases(&CaseFilter::default())
    }

    /// Refused while feedback, tags or grammar findings reference the case.
    pub fn delete_case(&self, case_id: &str) -> StoreResult<()> {
        let conn = self.lock();
        match conn.execute("DELETE FROM cases WHERE case_id = ?1", [case_id]) {
            Ok(0) => Err(StoreError::NotFound(case_id.to_string())),
            Ok(_) => Ok(()),
            Err(rusqlite::Error::SqliteFailure(e, _)) if e.code == rusqlite::ErrorCode::ConstraintViolation => {
                Err(StoreError::HasDependents(case_id.to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn require_case(conn: &Connection, case_id: &str) -> StoreResult<()> {
        conn.query_row("SELECT 1 FROM cases WHERE case_id = ?1", [case_id], |_| Ok(()))
            .optional()?
            .ok_or_else(|| StoreError::UnknownCase(case_id.to_string()))
    }

    pub fn save_feedback(&self, record: &FeedbackRecord) -> StoreResult<i64> {
        record.ratings.check()?;
        let created = record.created_at.unwrap_or_else(|| self.clock.now());
        let conn = self.lock();
        CaseStore::require_case(&conn, &record.case_id)?;
        let r = &record.ratings;
        conn.execute(
            "INSERT INTO feedback (case_id, reviewer_id, clinical_accuracy, documentation_quality,
             educational_utility, cultural_appropriateness, free_text, created_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)",
            params![
                record.case_id,
                record.reviewer_id,
                r.clinical_accuracy,
                r.documentation_quality,
                r.educational_utility,
                r.cultural_appropriateness,
                record.free_text,
                format_timestamp(&created),
            ],
        )?;
        Ok(conn.last_insert_rowid())
    }

    fn feedback_query(&self, where_clause: &str, args: &[&dyn rusqlite::ToSql]) -> StoreResult<Vec<FeedbackRecord>> {
        let conn = self.lock();
        let mut stmt = conn.prepare(&format!(
            "SELECT feedback_id, case_id, reviewer_id, clinical_accuracy, documentation_quality,
             educational_utility, cultural_appropriateness, free_text, created_at
             FROM feedback {where_clause} ORDER BY feedback_id"
        ))?;
        let rows = stmt
            .query_map(args, |r| {
                Ok((
                    FeedbackRecord {
                        feedback_id: r.get(0)?,
                        case_id: r.get(1)?,
                        reviewer_id: r.get(2)?,
                        ratings: Ratings {
                            clinical_accuracy: r.get(3)?,
                            documentation_quality: r.get(4)?,
                            educational_utility: r.get(5)?,
                            cultural_appropriateness: r.get(6)?,
                        },
                        free_text: r.get(7)?,
                        created_at: None,
                    },
                    r.get::<_, String>(8)?,
                ))
            })?
            .collect::<Result<Vec<_>, _>>()?;
        rows.into_iter()
            .map(|(mut f, t)| {
                f.created_at = Some(parse_time(&t)?);
                Ok(f)
            })
            .collect()
    }

    pub fn feedback_for(&self, case_id: &str) -> StoreResult<Vec<FeedbackRecord>> {
        self.feedback_query("WHERE case_id = ?1", &[&case_id])
    }

    pub fn all_feedback(&self) -> StoreResult<Vec<FeedbackRecord>> {
        self.feedback_query("", &[])
    }

    pub fn add_error_tag(&self, tag: &ErrorTag) -> StoreResult<i64> {
        let created = tag.created_at.unwrap_or_else(|| self.clock.now());
        let conn = self.lock();
        CaseStore::require_case(&conn, &tag.case_id)?;
        conn.execute(
            "INSERT INTO error_tags (case_id, category, severe, source, created_at) VALUES (?1, ?2, ?3, ?4, ?5)",
            params![tag.case_id, tag.category.as_str(), tag.severe, tag.source.as_str(), format_timestamp(&created)],
        )?;
        Ok(conn.last_insert_rowid())
    }

    fn tag_query(&self, where_clause: &str, args: &[&dyn rusqlite::ToSql]) -> StoreResult<Vec<ErrorTag>> {
        let conn = self.lock();
        let mut stmt = conn.prepare(&format!(
            "SELECT tag_id, case_id, category, severe, source, created_at FROM error_tags {where_clause} ORDER BY tag_id"
        ))?;
        let rows = stmt
            .query_map(args, |r| {
                Ok((
                    r.get::<_, i64>(0)?,
                    r.get::<_, String>(1)?,
                    r.get::<_, String>(2)?,
                    r.get::<_, bool>(3)?,
                    r.get::<_, String>(4)?,
                    r.get::<_, String>(5)?,
                ))
            })?
            .collect::<Result<Vec<_>, _>>()?;
        rows.into_iter()
            .map(|(tag_id, case_id, cat, severe, source, t)| {
                let category = ErrorCategory::parse(&cat).ok_or_else(|| StoreError::Corrupt(format!("category {cat:?}")))?;
                let source = match source.as_str() {
                    "automated" => TagSource::Automated,
                    "reviewer" => TagSource::Reviewer,
                    other => return Err(StoreError::Corrupt(format!("tag source {other:?}"))),
                };
                Ok(ErrorTag { tag_id, case_id, category, severe, source, created_at: Some(parse_time(&t)?) })
            })
            .collect()
    }

    pub fn error_tags_for(&self, case_id: &str) -> StoreResult<Vec<ErrorTag>> {
        self.tag_query("WHERE case_id = ?1", &[&case_id])
    }

    pub fn all_error_tags(&self) -> StoreResult<Vec<ErrorTag>> {
        self.tag_query("", &[])
    }

    /// Replaces the stored grammar findings for a case.
    pub fn save_grammar_issues(&self, case_id: &str, issues: &[GrammarIssue]) -> StoreResult<()> {
        let mut conn = self.lock();
        CaseStore::require_case(&conn, case_id)?;
        let tx = conn.transaction()?;
        tx.execute("DELETE FROM grammar_issues WHERE case_id = ?1", [case_id])?;
        for i in issues {
            tx.execute(
                "INSERT INTO grammar_issues (case_id, field_path, kind, span_start, span_end) VALUES (?1, ?2, ?3, ?4, ?5)",
                params![case_id, i.field_path, i.kind.as_str(), i.span.0 as i64, i.span.1 as i64],
            )?;
        }
        tx.commit()?;
        Ok(())
    }

    pub fn grammar_issues_for(&self, case_id: &str) -> StoreResult<Vec<GrammarIssue>> {
        let conn = self.lock();
        let mut stmt = conn.prepare(
            "SELECT field_path, kind, span_start, span_end FROM grammar_issues WHERE case_id = ?1 ORDER BY issue_id",
        )?;
        let rows = stmt
            .query_map([case_id], |r| {
                Ok((r.get::<_, String>(0)?, r.get::<_, String>(1)?, r.get::<_, i64>(2)?, r.get::<_, i64>(3)?))
            })?
            .collect::<Result<Vec<_>, _>>()?;
        rows.into_iter()
            .map(|(field_path, kind, s, e)| {
                let kind = GrammarKind::parse(&kind).ok_or_else(|| StoreError::Corrupt(format!("grammar kind {kind:?}")))?;
                Ok(GrammarIssue { field_path, kind, span: (s as usize, e as usize) })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orchestrator::FixedClock;

    fn aurora() -> CaseFile {
        CaseFile::from_json(include_str!("../../tests/fixtures/aurora.json")).unwrap()
    }

    fn store() -> CaseStore {
        CaseStore::in_memory().unwrap().with_clock(Arc::new(FixedClock::default_start()))
    }

    fn record(id: &str, store: &CaseStore) -> CaseRecord {
        CaseRecord {
            case_id: id.into(),
            case: aurora(),
            disorders: vec![DisorderType::Articulation],
            provenance: None,
            created_at: store.now(),
        }
    }

    fn feedback(case_id: &str, rating: i64) -> FeedbackRecord {
        FeedbackRecord {
            feedback_id: 0,
            case_id: case_id.into(),
            reviewer_id: "rev-1".into(),
            ratings: Ratings {
                clinical_accuracy: rating,
                documentation_quality: 4,
                educational_utility: 4,
                cultural_appropriateness: 5,
            },
            free_text: "clear goals".into(),
            created_at: None,
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let s = store();
        let r = record("c1", &s);
        s.save_case(&r).unwrap();
        let back = s.load_case("c1").unwrap();
        assert_eq!(back.case.to_canonical_json(), r.case.to_canonical_json());
        assert_eq!(back, r);
        assert_eq!(s.load_case("nope").unwrap_err().code(), "not_found");
        assert_eq!(s.save_case(&r).unwrap_err().code(), "duplicate_case");
    }

    #[test]
    fn feedback_rules() {
        let s = store();
        s.save_case(&record("c1", &s)).unwrap();
        let id = s.save_feedback(&feedback("c1", 5)).unwrap();
        let got = s.feedback_for("c1").unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].feedback_id, id);
        assert!(got[0].created_at.is_some());
        assert_eq!(s.save_feedback(&feedback("c1", 6)).unwrap_err().code(), "rating_out_of_range");
        assert_eq!(s.save_feedback(&feedback("c1", 0)).unwrap_err().code(), "rating_out_of_range");
        assert_eq!(s.save_feedback(&feedback("gone", 3)).unwrap_err().code(), "unknown_case");
    }

    #[test]
    fn deletion_restricted_by_dependents() {
        let s = store();
        s.save_case(&record("c1", &s)).unwrap();
        s.save_case(&record("c2", &s)).unwrap();
        s.save_feedback(&feedback("c1", 4)).unwrap();
        assert_eq!(s.delete_case("c1").unwrap_err().code(), "case_has_dependents");
        s.delete_case("c2").unwrap();
        assert_eq!(s.save_feedback(&feedback("c2", 4)).unwrap_err().code(), "unknown_case");
        assert_eq!(s.add_error_tag(&ErrorTag::new("c2", ErrorCategory::CulturalInsensitivity, TagSource::Reviewer)).unwrap_err().code(), "unknown_case");
    }

    #[test]
    fn search_filters_and_order() {
        let s = store();
        for id in ["b", "a", "c"] {
            s.save_case(&record(id, &s)).unwrap();
        }
        let mut other = record("d", &s);
        other.case.grade = "6th Grade".into();
        other.disorders = vec![DisorderType::Fluency];
        s.save_case(&other).unwrap();
        let ids = |f: &CaseFilter| s.search_cases(f).unwrap().into_iter().map(|r| r.case_id).collect::<Vec<_>>();
        assert_eq!(ids(&CaseFilter::default()), ["b", "a", "c", "d"]);
        let f = CaseFilter { disorder: Some(DisorderType::Fluency), ..Default::default() };
        assert_eq!(ids(&f), ["d"]);
        let f = CaseFilter { grade_max: GradeLevel::grade(3), severity: aurora().severity(), ..Default::default() };
        assert_eq!(ids(&f), ["b", "a", "c"]);
        let all = s.all_cases().unwrap();
        assert!(all.iter().all(|r| CaseFilter::default().accepts(r)));
    }

    #[test]
    fn grammar_findings_persist() {
        let s = store();
        s.save_case(&record("c1", &s)).unwrap();
        let issues = vec![GrammarIssue { field_path: "background".into(), kind: GrammarKind::DoubleSpace, span: (1, 3) }];
        s.save_grammar_issues("c1", &issues).unwrap();
        assert_eq!(s.grammar_issues_for("c1").unwrap(), issues);
        assert_eq!(s.delete_case("c1").unwrap_err().code(), "case_has_dependents");
    }

    #[test]
    fn reopen_keeps_data() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db/cases.sqlite");
        let before = {
            let s = CaseStore::open(&path).unwrap();
            s.save_case(&record("c1", &s)).unwrap();
            s.all_cases().unwrap()
        };
        let s = CaseStore::open(&path).unwrap();
        assert_eq!(s.all_cases().unwrap(), before);
    }

    #[test]
    fn aurora_prose_is_clean() {
        assert_eq!(grammar_check(&aurora()), vec![]);
    }
}
