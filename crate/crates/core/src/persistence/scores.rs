use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rusqlite::params;
use serde::{Deserialize, Serialize};

use super::{parse_time, CaseStore, GroupBy, StoreError, StoreResult};
use crate::orchestrator::format_timestamp;
use crate::quality::{aggregate, AggregateReport, QualityScore};

/// Scorer name used for the deterministic rubric.
pub const RULES_SCORER: &str = "rules";

/// Latest score for one case from one scorer (the rubric or a judge model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredScore {
    pub case_id: String,
    pub scorer: String,
    pub score: QualityScore,
    pub created_at: DateTime<Utc>,
}

impl CaseStore {
    /// Stores the score, replacing an earlier one from the same scorer.
    pub fn save_score(&self, case_id: &str, scorer: &str, score: &QualityScore) -> StoreResult<()> {
        self.insert_score(case_id, scorer, score, self.clock.now())
    }

    pub(super) fn insert_score(
        &self,
        case_id: &str,
        scorer: &str,
        score: &QualityScore,
        created: DateTime<Utc>,
    ) -> StoreResult<()> {
        let conn = self.lock();
        CaseStore::require_case(&conn, case_id)?;
        conn.execute(
            "INSERT OR REPLACE INTO quality_scores (case_id, scorer, score_json, created_at) VALUES (?1, ?2, ?3, ?4)",
            params![case_id, scorer, serde_json::to_string(score).expect("score serializes"), format_timestamp(&created)],
        )?;
        Ok(())
    }

    /// Stored scores ordered by (case_id, scorer), optionally for one scorer.
    pub fn scores(&self, scorer: Option<&str>) -> StoreResult<Vec<StoredScore>> {
        let conn = self.lock();
        let mut stmt = conn.prepare(
            "SELECT case_id, scorer, score_json, created_at FROM quality_scores
             WHERE ?1 IS NULL OR scorer = ?1 ORDER BY case_id, scorer",
        )?;
        let rows = stmt
            .query_map([scorer], |r| {
                Ok((r.get::<_, String>(0)?, r.get::<_, String>(1)?, r.get::<_, String>(2)?, r.get::<_, String>(3)?))
            })?
            .collect::<Result<Vec<_>, _>>()?;
        rows.into_iter()
            .map(|(case_id, scorer, json, t)| {
                let score = serde_json::from_str(&json).map_err(|e| StoreError::Corrupt(format!("score: {e}")))?;
                Ok(StoredScore { case_id, scorer, score, created_at: parse_time(&t)? })
            })
            .collect()
    }

    /// Mean scores per group. Without grouping there is a single "all" row;
    /// by disorder a case counts once under its joined disorder names.
    pub fn quality_report(&self, scorer: &str, group_by: GroupBy) -> StoreResult<Vec<AggregateReport>> {
        let mut groups: BTreeMap<String, Vec<QualityScore>> = BTreeMap::new();
        for s in self.scores(Some(scorer))? {
            let key = match group_by {
                GroupBy::None => "all".to_string(),
                GroupBy::Month => s.created_at.format("%Y-%m").to_string(),
                GroupBy::Model | GroupBy::Disorder => {
                    let r = self.load_case(&s.case_id)?;
                    if group_by == GroupBy::Model {
                        r.model_id().to_string()
                    } else {
                        r.disorders.iter().map(|d| d.display_name()).collect::<Vec<_>>().join(" + ")
                    }
                }
            };
            groups.entry(key).or_default().push(s.score);
        }
        aggregate(&groups).map_err(|e| StoreError::Corrupt(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::super::CaseRecord;
    use super::*;
    use crate::{CaseFile, DisorderType};

    fn store_with(ids: &[&str]) -> CaseStore {
        let s = CaseStore::in_memory().unwrap();
        for id in ids {
            let rec = CaseRecord {
                case_id: id.to_string(),
                case: CaseFile::default(),
                disorders: vec![DisorderType::Fluency],
                provenance: None,
                created_at: s.now(),
            };
            s.save_case(&rec).unwrap();
        }
        s
    }

    #[test]
    fn replace_and_report() {
        let s = store_with(&["a", "b"]);
        s.save_score("a", RULES_SCORER, &QualityScore::new(1, 1, 1, 1)).unwrap();
        s.save_score("a", RULES_SCORER, &QualityScore::new(5, 4, 4, 5)).unwrap();
        s.save_score("b", RULES_SCORER, &QualityScore::new(5, 3, 4, 5)).unwrap();
        s.save_score("b", "judge-x", &QualityScore::new(2, 2, 2, 2)).unwrap();
        assert_eq!(s.scores(None).unwrap().len(), 3);
        let rows = s.quality_report(RULES_SCORER, GroupBy::None).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n, 2);
        assert_eq!(rows[0].consistency, 3.5);
        assert_eq!(rows[0].overall, (5.0 + 3.5 + 4.0 + 5.0) / 4.0);
        let by = s.quality_report(RULES_SCORER, GroupBy::Disorder).unwrap();
        assert_eq!(by[0].group, "Fluency Disorders");
    }

    #[test]
    fn unknown_case_rejected() {
        let s = store_with(&[]);
        let err = s.save_score("nope", RULES_SCORER, &QualityScore::new(5, 5, 5, 5)).unwrap_err();
        assert_eq!(err.code(), "unknown_case");
        assert!(s.quality_report(RULES_SCORER, GroupBy::Model).unwrap().is_empty());
    }
}
