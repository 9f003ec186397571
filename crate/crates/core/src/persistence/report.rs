use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{CaseStore, StoreResult};
use crate::case_model::DisorderType;
use crate::quality::ErrorCategory;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    #[default]
    None,
    Model,
    Disorder,
    Month,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportFilter {
    pub model_id: Option<String>,
    pub disorder: Option<DisorderType>,
    /// Inclusive lower bound on tag time.
    pub since: Option<DateTime<Utc>>,
    /// Exclusive upper bound on tag time.
    pub until: Option<DateTime<Utc>>,
    #[serde(default)]
    pub group_by: GroupBy,
}

pub type CategoryCounts = BTreeMap<String, usize>;

/// Error-tag counts per category, overall, per group key and per month.
/// Every category is present, zero when unused.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub total_tags: usize,
    pub totals: CategoryCounts,
    pub groups: BTreeMap<String, CategoryCounts>,
    pub trend: BTreeMap<String, CategoryCounts>,
}

fn zero_counts() -> CategoryCounts {
    ErrorCategory::ALL.iter().map(|c| (c.as_str().to_string(), 0)).collect()
}

impl CaseStore {
    pub fn error_report(&self, filter: &ReportFilter) -> StoreResult<ErrorReport> {
        let tags = self.all_error_tags()?;
        let mut cases: HashMap<String, (String, Vec<DisorderType>)> = HashMap::new();
        let mut report =
            ErrorReport { total_tags: 0, totals: zero_counts(), groups: BTreeMap::new(), trend: BTreeMap::new() };
        for tag in tags {
            if !cases.contains_key(&tag.case_id) {
                let r = self.load_case(&tag.case_id)?;
                cases.insert(tag.case_id.clone(), (r.model_id().to_string(), r.disorders));
            }
            let (model, disorders) = &cases[&tag.case_id];
            let at = tag.created_at.expect("stored tags carry a timestamp");
            if filter.model_id.as_ref().is_some_and(|m| m != model)
                || filter.disorder.is_some_and(|d| !disorders.contains(&d))
                || filter.since.is_some_and(|s| at < s)
                || filter.until.is_some_and(|u| at >= u)
            {
                continue;
            }
            let cat = tag.category.as_str().to_string();
            let month = at.format("%Y-%m").to_string();
            report.total_tags += 1;
            *report.totals.get_mut(&cat).unwrap() += 1;
            *report.trend.entry(month.clone()).or_insert_with(zero_counts).get_mut(&cat).unwrap() += 1;
            let keys: Vec<String> = match filter.group_by {
                GroupBy::None => vec![],
                GroupBy::Model => vec![model.clone()],
                GroupBy::Disorder => disorders.iter().map(|d| d.display_name().to_string()).collect(),
                GroupBy::Month => vec![month],
            };
            for k in keys {
                *report.groups.entry(k).or_insert_with(zero_counts).get_mut(&cat).unwrap() += 1;
            }
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{CaseRecord, ErrorTag, TagSource};
    use super::*;
    use crate::CaseFile;

    #[test]
    fn empty_store_reports_zeros() {
        let s = CaseStore::in_memory().unwrap();
        let r = s.error_report(&ReportFilter::default()).unwrap();
        assert_eq!(r.total_tags, 0);
        assert_eq!(r.totals.len(), 5);
        assert!(r.totals.values().all(|v| *v == 0));
    }

    #[test]
    fn category_counts() {
        let s = CaseStore::in_memory().unwrap();
        let rec = CaseRecord {
            case_id: "c".into(),
            case: CaseFile::default(),
            disorders: vec![DisorderType::Voice],
            provenance: None,
            created_at: s.now(),
        };
        s.save_case(&rec).unwrap();
        for c in [ErrorCategory::InternalInconsistency, ErrorCategory::InternalInconsistency, ErrorCategory::CulturalInsensitivity] {
            s.add_error_tag(&ErrorTag::new("c", c, TagSource::Reviewer)).unwrap();
        }
        let r = s.error_report(&ReportFilter { group_by: GroupBy::Disorder, ..Default::default() }).unwrap();
        assert_eq!(r.totals["internal_inconsistency"], 2);
        assert_eq!(r.totals["cultural_insensitivity"], 1);
        assert_eq!(r.groups["Voice Disorders"]["internal_inconsistency"], 2);
        let none = s.error_report(&ReportFilter { model_id: Some("x".into()), ..Default::default() }).unwrap();
        assert_eq!(none.total_tags, 0);
    }
}
