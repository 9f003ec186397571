//! Deterministic rubric scorers.

use super::{Dimension, ErrorCategory, Issue, QualityScore, RubricConfig, ScoringContext};
use crate::case_model::{
    check_age_grade, check_assessment_match, check_percentile_consistency, check_score_severity,
    parse_session_data, parse_smart_goal, CaseFile, Severity,
};

/// Required fields counted by the structural scorer: 4 demographics, the
/// background, 5 fields of one assessment, 3 fields of each of 2 goals and
/// 5 fields of each of 3 session notes.
pub const STRUCTURAL_FIELD_TOTAL: usize = 4 + 1 + 5 + 2 * 3 + 3 * 5;

fn filled(s: &str) -> bool {
    !s.trim().is_empty()
}

fn issue(dimension: Dimension, code: &str, category: ErrorCategory, detail: String) -> Issue {
    Issue { dimension, code: code.to_string(), category: Some(category), detail }
}

/// Populated required fields; extra goals, notes and assessments beyond the
/// required counts only help through their best-populated members.
pub fn count_structural_fields(case: &CaseFile) -> usize {
    let demographics = [filled(&case.name), case.age.is_some(), filled(&case.grade), filled(&case.gender)]
        .iter()
        .filter(|b| **b)
        .count();
    let background = filled(&case.background) as usize;
    let assessment = case
        .assessment_results
        .iter()
        .map(|a| {
            [
                filled(&a.assessment_name),
                filled(&a.domain),
                a.standard_score.is_some(),
                a.percentile.is_some(),
                filled(&a.severity),
            ]
            .iter()
            .filter(|b| **b)
            .count()
        })
        .max()
        .unwrap_or(0);
    let mut goals: Vec<usize> = case
        .annual_goals
        .iter()
        .map(|g| g.goal_number.is_some() as usize + filled(&g.goal_brief) as usize + filled(&g.goal_annual) as usize)
        .collect();
    goals.sort_unstable_by(|a, b| b.cmp(a));
    let mut notes: Vec<usize> = case
        .session_notes
        .iter()
        .map(|n| {
            [filled(&n.date), filled(&n.duration), filled(&n.setting), filled(&n.goal_addressed), filled(&n.note)]
                .iter()
                .filter(|b| **b)
                .count()
        })
        .collect();
    notes.sort_unstable_by(|a, b| b.cmp(a));
    demographics
        + background
        + assessment
        + goals.iter().take(2).sum::<usize>()
        + notes.iter().take(3).sum::<usize>()
}

pub fn score_structural(case: &CaseFile, cfg: &RubricConfig) -> (u8, Vec<Issue>) {
    let present = count_structural_fields(case);
    let p = present as f64 / STRUCTURAL_FIELD_TOTAL as f64;
    let [t4, t3, t2] = cfg.structural_thresholds;
    let score = if present == STRUCTURAL_FIELD_TOTAL {
        5
    } else if p >= t4 {
        4
    } else if p >= t3 {
        3
    } else if p >= t2 {
        2
    } else {
        1
    };
    let mut issues = Vec::new();
    if score < 5 {
        issues.push(issue(
            Dimension::Structural,
            "missing_fields",
            ErrorCategory::DocumentationStandardViolation,
            format!("{present} of {STRUCTURAL_FIELD_TOTAL} required fields populated"),
        ));
    }
    (score, issues)
}

fn deduct(weights: &[u8], failed: &[bool]) -> u8 {
    let lost: u32 = weights.iter().zip(failed).filter(|(_, f)| **f).map(|(w, _)| *w as u32).sum();
    5u32.saturating_sub(lost).max(1) as u8
}

/// True when every assessment lists an instrument catalogued for at least
/// one requested disorder; failures are appended to `issues`.
fn instruments_match(case: &CaseFile, ctx: &ScoringContext, dim: Dimension, issues: &mut Vec<Issue>) -> bool {
    if ctx.disorders.is_empty() {
        return true;
    }
    let mut ok = !case.assessment_results.is_empty();
    for a in &case.assessment_results {
        if !ctx.disorders.iter().any(|d| check_assessment_match(*d, &a.assessment_name).matched) {
            ok = false;
            issues.push(issue(
                dim,
                "assessment_mismatch",
                ErrorCategory::InternalInconsistency,
                format!("{:?} is not an instrument listed for the requested disorders", a.assessment_name),
            ));
        }
    }
    ok
}

pub fn score_consistency(case: &CaseFile, ctx: &ScoringContext, cfg: &RubricConfig) -> (u8, Vec<Issue>) {
    let dim = Dimension::Consistency;
    let mut issues = Vec::new();
    let goal_numbers = case.goal_numbers();

    // (a) session notes reference existing goals
    let mut refs_ok = true;
    for (i, note) in case.session_notes.iter().enumerate() {
        let refs = parse_session_data(note).goal_refs;
        if refs.is_empty() {
            refs_ok = false;
            issues.push(issue(dim, "missing_goal_reference", ErrorCategory::InternalInconsistency, format!("session note {} names no goal", i + 1)));
        }
        for r in refs.iter().filter(|r| !goal_numbers.contains(r)) {
            refs_ok = false;
            issues.push(issue(dim, "dangling_goal_reference", ErrorCategory::InternalInconsistency, format!("session note {} references goal {r}, which does not exist", i + 1)));
        }
    }

    // (b) background mentions each requested disorder
    let mut background_ok = true;
    for d in ctx.disorders.iter().filter(|d| !d.mentioned_in(&case.background)) {
        background_ok = false;
        issues.push(issue(dim, "background_missing_disorder", ErrorCategory::InternalInconsistency, format!("background does not mention {}", d.display_name())));
    }

    // (c) each goal targets a requested disorder
    let mut goals_ok = true;
    if !ctx.disorders.is_empty() {
        for g in &case.annual_goals {
            let text = format!("{} {}", g.goal_brief, g.goal_annual);
            if !ctx.disorders.iter().any(|d| d.mentioned_in(&text)) {
                goals_ok = false;
                issues.push(issue(dim, "goal_disorder_mismatch", ErrorCategory::DisorderGoalMisalignment, format!("goal {:?} matches no requested disorder", g.goal_number.unwrap_or(0))));
            }
        }
    }

    // (d) instruments fit the requested disorders
    let instruments_ok = instruments_match(case, ctx, dim, &mut issues);

    let failed = [!refs_ok, !background_ok, !goals_ok, !instruments_ok];
    (deduct(&cfg.consistency_weights, &failed), issues)
}

pub fn score_clinical(case: &CaseFile, ctx: &ScoringContext, cfg: &RubricConfig) -> (u8, Vec<Issue>) {
    let dim = Dimension::Clinical;
    let mut issues = Vec::new();

    let grade = case.grade_level().or(ctx.grade);
    let age_ok = match (case.age, grade) {
        (Some(age), Some(grade)) => check_age_grade(age, grade).unwrap_or(false),
        _ => false,
    };
    if !age_ok {
        issues.push(issue(dim, "age_grade_mismatch", ErrorCategory::DevelopmentalInappropriateness, format!("age {:?} does not fit grade {:?}", case.age, case.grade)));
    }

    let len = case.background.chars().count();
    let background_ok = len >= cfg.min_background_chars;
    if !background_ok {
        issues.push(issue(dim, "background_too_short", ErrorCategory::DocumentationStandardViolation, format!("background has {len} characters; minimum {}", cfg.min_background_chars)));
    }

    let mut severity_ok = !case.assessment_results.is_empty();
    let mut percentile_ok = !case.assessment_results.is_empty();
    for a in &case.assessment_results {
        match (a.standard_score, Severity::parse(&a.severity)) {
            (Some(s), Some(sev)) if check_score_severity(s, sev) => {}
            (s, _) => {
                severity_ok = false;
                issues.push(issue(dim, "score_severity_mismatch", ErrorCategory::InternalInconsistency, format!("standard score {s:?} does not fit severity {:?}", a.severity)));
            }
        }
        match (a.standard_score, a.percentile) {
            (Some(s), Some(p)) if check_percentile_consistency(s, p) => {}
            (s, p) => {
                percentile_ok = false;
                issues.push(issue(dim, "percentile_inconsistent", ErrorCategory::InternalInconsistency, format!("percentile {p:?} does not fit standard score {s:?}")));
            }
        }
    }

    let instruments_ok = instruments_match(case, ctx, dim, &mut issues);
    let failed = [!age_ok, !background_ok, !severity_ok, !percentile_ok, !instruments_ok];
    (deduct(&cfg.clinical_weights, &failed), issues)
}

pub fn score_documentation(case: &CaseFile) -> (u8, Vec<Issue>) {
    let dim = Dimension::Documentation;
    let mut issues = Vec::new();
    let goals = &case.annual_goals;
    let smart = goals
        .iter()
        .filter(|g| {
            let ok = parse_smart_goal(&g.goal_annual).is_smart();
            if !ok {
                issues.push(issue(dim, "goal_not_smart", ErrorCategory::DocumentationStandardViolation, format!("goal {:?} lacks SMART elements", g.goal_number.unwrap_or(0))));
            }
            ok
        })
        .count();
    let notes = &case.session_notes;
    let with_data = notes
        .iter()
        .enumerate()
        .filter(|(i, n)| {
            let ok = parse_session_data(n).has_objective_data;
            if !ok {
                issues.push(issue(dim, "note_without_data", ErrorCategory::DocumentationStandardViolation, format!("session note {} has no objective data", i + 1)));
            }
            ok
        })
        .count();
    let frac = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let f1 = frac(smart, goals.len());
    let f2 = frac(with_data, notes.len());
    let raw = 1.0 + 4.0 * (f1 + f2) / 2.0;
    let score = (raw + 0.5 + 1e-9).floor().clamp(1.0, 5.0) as u8;
    (score, issues)
}

/// All four rule scores with their issues.
pub fn score_case(case: &CaseFile, ctx: &ScoringContext, cfg: &RubricConfig) -> QualityScore {
    let (structural, mut issues) = score_structural(case, cfg);
    let (consistency, i2) = score_consistency(case, ctx, cfg);
    let (clinical, i3) = score_clinical(case, ctx, cfg);
    let (documentation, i4) = score_documentation(case);
    issues.extend(i2);
    issues.extend(i3);
    issues.extend(i4);
    QualityScore { structural, consistency, clinical, documentation, issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_model::{AnnualGoal, DisorderType};

    fn aurora() -> CaseFile {
        CaseFile::from_json(include_str!("../../tests/fixtures/aurora.json")).unwrap()
    }

    fn sofia() -> CaseFile {
        CaseFile::from_json(include_str!("../../tests/fixtures/sofia.json")).unwrap()
    }

    fn cfg() -> RubricConfig {
        RubricConfig::default()
    }

    #[test]
    fn aurora_scores() {
        let ctx = ScoringContext::new(&[DisorderType::Articulation]);
        let s = score_case(&aurora(), &ctx, &cfg());
        assert_eq!(s.values(), [5, 5, 5, 5], "{:?}", s.issues);
        assert!(s.issues.is_empty());
    }

    #[test]
    fn sofia_assessment_mismatch() {
        let ctx = ScoringContext::new(&[DisorderType::PragmaticLanguage]);
        let (c, issues) = score_consistency(&sofia(), &ctx, &cfg());
        assert_eq!(c, 4);
        assert!(issues.iter().all(|i| i.code == "assessment_mismatch"), "{issues:?}");
        assert_eq!(score_structural(&sofia(), &cfg()).0, 5);
        assert_eq!(score_documentation(&sofia()).0, 5);
    }

    #[test]
    fn structural_mutations() {
        let mut c = aurora();
        c.background.clear();
        c.session_notes[1].note.clear();
        assert_eq!(count_structural_fields(&c), 29);
        assert_eq!(score_structural(&c, &cfg()).0, 4);
        assert_eq!(score_structural(&CaseFile::default(), &cfg()).0, 1);
    }

    #[test]
    fn dangling_reference() {
        let mut c = aurora();
        c.annual_goals.truncate(2);
        c.session_notes[2].goal_addressed = "Goal 5".into();
        let ctx = ScoringContext::new(&[DisorderType::Articulation]);
        let (score, issues) = score_consistency(&c, &ctx, &cfg());
        assert!(issues.iter().any(|i| i.code == "dangling_goal_reference"));
        assert_eq!(score, 4);
    }

    #[test]
    fn clinical_failures() {
        let mut c = aurora();
        c.age = Some(4);
        c.grade = "9th Grade".into();
        let ctx = ScoringContext::new(&[DisorderType::Articulation]);
        let (score, issues) = score_clinical(&c, &ctx, &cfg());
        assert_eq!(score, 4);
        assert_eq!(issues[0].code, "age_grade_mismatch");
        c.background = "Short background.".into();
        let (_, issues) = score_clinical(&c, &ctx, &cfg());
        assert!(issues.iter().any(|i| i.code == "background_too_short"));
    }

    #[test]
    fn documentation_formula() {
        let mut c = aurora();
        let generic = AnnualGoal { goal_number: Some(4), goal_brief: "x".into(), goal_annual: "Student will improve communication skills.".into() };
        c.annual_goals.truncate(2);
        c.annual_goals.push(generic.clone());
        c.annual_goals.push(AnnualGoal { goal_number: Some(3), ..generic });
        assert_eq!(score_documentation(&c).0, 4);
        let mut bare = c.clone();
        for g in bare.annual_goals.iter_mut() {
            g.goal_annual = "Student will improve communication skills.".into();
        }
        for n in bare.session_notes.iter_mut() {
            n.note = "Activity: play. Clinical Observation: fine.".into();
        }
        assert_eq!(score_documentation(&bare).0, 1);
    }

    #[test]
    fn no_cultural_category_from_rules() {
        let ctx = ScoringContext::new(&[DisorderType::Voice]);
        let s = score_case(&sofia(), &ctx, &cfg());
        assert!(s.issues.iter().all(|i| i.category != Some(ErrorCategory::CulturalInsensitivity)));
    }
}
