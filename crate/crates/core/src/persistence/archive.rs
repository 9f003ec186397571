use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{CaseRecord, CaseStore, ErrorTag, FeedbackRecord, GrammarIssue, StoreError, StoreResult, StoredScore};

/// One archive line. Cases come first so references resolve on import.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArchiveEntry {
    Case(CaseRecord),
    Feedback(FeedbackRecord),
    ErrorTag(ErrorTag),
    Grammar { case_id: String, issues: Vec<GrammarIssue> },
    Score(StoredScore),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveCounts {
    pub cases: usize,
    pub feedback: usize,
    pub error_tags: usize,
    pub grammar: usize,
    #[serde(default)]
    pub scores: usize,
}

impl CaseStore {
    /// Writes the whole store as JSON lines.
    pub fn export_jsonl<W: Write>(&self, mut out: W) -> StoreResult<ArchiveCounts> {
        let mut counts = ArchiveCounts::default();
        let mut write = |e: &ArchiveEntry| -> StoreResult<()> {
            writeln!(out, "{}", serde_json::to_string(e).expect("archive entry serializes"))?;
            Ok(())
        };
        let cases = self.all_cases()?;
        for c in &cases {
            write(&ArchiveEntry::Case(c.clone()))?;
            counts.cases += 1;
        }
        for f in self.all_feedback()? {
            write(&ArchiveEntry::Feedback(f))?;
            counts.feedback += 1;
        }
        for t in self.all_error_tags()? {
            write(&ArchiveEntry::ErrorTag(t))?;
            counts.error_tags += 1;
        }
        for c in &cases {
            let issues = self.grammar_issues_for(&c.case_id)?;
            if !issues.is_empty() {
                write(&ArchiveEntry::Grammar { case_id: c.case_id.clone(), issues })?;
                counts.grammar += 1;
            }
        }
        for s in self.scores(None)? {
            write(&ArchiveEntry::Score(s))?;
            counts.scores += 1;
        }
        Ok(counts)
    }

    /// Loads an archive produced by `export_jsonl`. Feedback and tag ids are
    /// reassigned; timestamps are kept.
    pub fn import_jsonl<R: BufRead>(&self, input: R) -> StoreResult<ArchiveCounts> {
        let mut counts = ArchiveCounts::default();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ArchiveEntry = serde_json::from_str(&line)
                .map_err(|e| StoreError::InvalidArchive { line: i + 1, message: e.to_string() })?;
            match entry {
                ArchiveEntry::Case(c) => {
                    self.save_case(&c)?;
                    counts.cases += 1;
                }
                ArchiveEntry::Feedback(f) => {
                    self.save_feedback(&f)?;
                    counts.feedback += 1;
                }
                ArchiveEntry::ErrorTag(t) => {
                    self.add_error_tag(&t)?;
                    counts.error_tags += 1;
                }
                ArchiveEntry::Grammar { case_id, issues } => {
                    self.save_grammar_issues(&case_id, &issues)?;
                    counts.grammar += 1;
                }
                ArchiveEntry::Score(s) => {
                    self.insert_score(&s.case_id, &s.scorer, &s.score, s.created_at)?;
                    counts.scores += 1;
                }
            }
        }
        Ok(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Ratings, TagSource};
    use super::*;
    use crate::quality::ErrorCategory;
    use crate::{CaseFile, DisorderType};

    #[test]
    fn export_import_round_trip() {
        let a = CaseStore::in_memory().unwrap();
        let case = CaseFile::from_json(include_str!("../../tests/fixtures/sofia.json")).unwrap();
        let rec = CaseRecord {
            case_id: "s1".into(),
            case: case.clone(),
            disorders: vec![DisorderType::PragmaticLanguage],
            provenance: None,
            created_at: a.now(),
        };
        a.save_case(&rec).unwrap();
        let ratings = Ratings { clinical_accuracy: 3, documentation_quality: 4, educational_utility: 4, cultural_appropriateness: 5 };
        a.save_feedback(&FeedbackRecord {
            feedback_id: 0,
            case_id: "s1".into(),
            reviewer_id: "r".into(),
            ratings,
            free_text: String::new(),
            created_at: None,
        })
        .unwrap();
        a.add_error_tag(&ErrorTag::new("s1", ErrorCategory::DisorderGoalMisalignment, TagSource::Automated)).unwrap();
        a.save_grammar_issues("s1", &super::super::grammar_check(&case)).unwrap();
        a.save_score("s1", super::super::RULES_SCORER, &crate::quality::QualityScore::new(5, 4, 4, 5)).unwrap();
        let mut buf = Vec::new();
        let exported = a.export_jsonl(&mut buf).unwrap();

        let b = CaseStore::in_memory().unwrap();
        let imported = b.import_jsonl(buf.as_slice()).unwrap();
        assert_eq!(exported, imported);
        assert_eq!(b.all_cases().unwrap(), a.all_cases().unwrap());
        assert_eq!(b.all_feedback().unwrap(), a.all_feedback().unwrap());
        assert_eq!(b.all_error_tags().unwrap(), a.all_error_tags().unwrap());
        assert_eq!(b.scores(None).unwrap(), a.scores(None).unwrap());
        let mut again = Vec::new();
        b.export_jsonl(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn bad_line_reports_position() {
        let s = CaseStore::in_memory().unwrap();
        let err = s.import_jsonl("\n{\"kind\":\"mystery\"}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, StoreError::InvalidArchive { line: 2, .. }));
    }
}
