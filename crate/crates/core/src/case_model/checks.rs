use super::{GradeLevel, Severity};
use crate::util::normal_cdf;

/// Norm-referenced scale of standard scores.
pub const SCORE_MEAN: f64 = 100.0;
pub const SCORE_SD: f64 = 15.0;

/// Maximum allowed gap between a reported percentile and the normal-model
/// percentile of its standard score.
pub const PERCENTILE_TOLERANCE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("age {0} is outside the supported range 3-22")]
pub struct AgeOutOfDomain(pub i64);

/// True iff `age` lies inside the grade's inclusive age range.
pub fn check_age_grade(age: i64, grade: GradeLevel) -> Result<bool, AgeOutOfDomain> {
    if !(3..=22).contains(&age) {
        return Err(AgeOutOfDomain(age));
    }
    let (lo, hi) = grade.age_range();
    Ok((lo as i64..=hi as i64).contains(&age))
}

/// Severity band of a standard score: Severe below 70, Moderate 70-85,
/// Mild 86-92. Scores above 92, or outside 40-160, carry no severity.
pub fn severity_for_score(standard_score: i64) -> Option<Severity> {
    match standard_score {
        40..=69 => Some(Severity::Severe),
        70..=85 => Some(Severity::Moderate),
        86..=92 => Some(Severity::Mild),
        _ => None,
    }
}

pub fn check_score_severity(standard_score: i64, severity: Severity) -> bool {
    severity_for_score(standard_score) == Some(severity)
}

/// Percentile implied by a standard score under the normal model.
pub fn expected_percentile(standard_score: i64) -> f64 {
    normal_cdf((standard_score as f64 - SCORE_MEAN) / SCORE_SD) * 100.0
}

pub fn check_percentile_consistency(standard_score: i64, percentile: i64) -> bool {
    if !(1..=99).contains(&percentile) {
        return false;
    }
    (percentile as f64 - expected_percentile(standard_score)).abs() <= PERCENTILE_TOLERANCE
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: u8) -> GradeLevel {
        GradeLevel::grade(n).unwrap()
    }

    #[test]
    fn age_grade_examples() {
        assert_eq!(check_age_grade(7, g(2)), Ok(true));
        assert_eq!(check_age_grade(12, g(6)), Ok(true));
        assert_eq!(check_age_grade(4, g(9)), Ok(false));
        assert_eq!(check_age_grade(2, g(1)), Err(AgeOutOfDomain(2)));
        assert_eq!(check_age_grade(23, g(12)), Err(AgeOutOfDomain(23)));
    }

    #[test]
    fn exactly_two_ages_per_grade() {
        for grade in GradeLevel::all() {
            let n = (3..=22)
                .filter(|&a| check_age_grade(a, grade).unwrap())
                .count();
            assert_eq!(n, 2, "{grade}");
        }
    }

    #[test]
    fn score_severity_examples() {
        assert!(check_score_severity(72, Severity::Moderate));
        assert!(!check_score_severity(100, Severity::Moderate));
        assert!(check_score_severity(85, Severity::Moderate));
        assert!(check_score_severity(70, Severity::Moderate));
        assert!(check_score_severity(69, Severity::Severe));
        assert!(check_score_severity(86, Severity::Mild));
        assert!(!check_score_severity(93, Severity::Mild));
        assert!(!check_score_severity(30, Severity::Severe));
    }

    #[test]
    fn percentile_examples() {
        assert!(check_percentile_consistency(72, 3));
        assert!(!check_percentile_consistency(72, 25));
        assert!(check_percentile_consistency(100, 50));
        assert!(!check_percentile_consistency(100, 0));
        assert!(!check_percentile_consistency(100, 100));
    }
}
