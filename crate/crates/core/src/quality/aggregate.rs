use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{QualityError, QualityScore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub group: String,
    /// Free-text grouping label shown in the table's type column.
    #[serde(default)]
    pub kind: String,
    pub n: usize,
    pub structural: f64,
    pub consistency: f64,
    pub clinical: f64,
    pub documentation: f64,
    pub overall: f64,
}

impl AggregateReport {
    pub fn means(&self) -> [f64; 4] {
        [self.structural, self.consistency, self.clinical, self.documentation]
    }
}

/// Rounds half-up to two decimals. The small epsilon keeps values such as
/// 4.125, which are not exactly representable, from rounding down.
pub fn round_half_up_2dp(x: f64) -> f64 {
    ((x * 100.0) + 0.5 + 1e-9).floor() / 100.0
}

pub fn display_2dp(x: f64) -> String {
    format!("{:.2}", round_half_up_2dp(x))
}

/// Overall score: the arithmetic mean of the four dimension means.
pub fn overall_from_means(means: [f64; 4]) -> f64 {
    means.iter().sum::<f64>() / 4.0
}

pub fn aggregate_group(group: &str, kind: &str, scores: &[QualityScore]) -> Result<AggregateReport, QualityError> {
    if scores.is_empty() {
        return Err(QualityError::EmptyGroup(group.to_string()));
    }
    let n = scores.len() as f64;
    let mean = |f: fn(&QualityScore) -> u8| scores.iter().map(|s| f(s) as f64).sum::<f64>() / n;
    let structural = mean(|s| s.structural);
    let consistency = mean(|s| s.consistency);
    let clinical = mean(|s| s.clinical);
    let documentation = mean(|s| s.documentation);
    Ok(AggregateReport {
        group: group.to_string(),
        kind: kind.to_string(),
        n: scores.len(),
        structural,
        consistency,
        clinical,
        documentation,
        overall: overall_from_means([structural, consistency, clinical, documentation]),
    })
}

/// One report per group, in key order.
pub fn aggregate(groups: &BTreeMap<String, Vec<QualityScore>>) -> Result<Vec<AggregateReport>, QualityError> {
    groups.iter().map(|(k, v)| aggregate_group(k, "", v)).collect()
}

/// Delimited table: group, type, four dimension means, overall.
pub fn report_table(reports: &[AggregateReport], delimiter: u8) -> String {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    w.write_record(["model", "type", "structural", "consistency", "clinical", "documentation", "overall"])
        .expect("in-memory write");
    for r in reports {
        let mut row = vec![r.group.clone(), r.kind.clone()];
        row.extend(r.means().iter().map(|m| display_2dp(*m)));
        row.push(display_2dp(r.overall));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
