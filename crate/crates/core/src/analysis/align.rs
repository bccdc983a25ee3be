//! Agreement between automatic metrics and participant feedback.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::log::{HintView, StudyLog};
use super::stats::{pearson_test, precision_recall, Correlation, PrecisionRecall};
use super::AnalysisError;
use crate::metrics::MetricRow;

/// Metric column against feedback field.
pub const CORRELATION_PAIRS: [(&str, &str); 4] = [
    ("InfoGain_mean", "informative"),
    ("InfoGain_comb", "informative"),
    ("Redundancy", "satisfaction"),
    ("Consistency", "satisfaction"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    /// Hint feedback records that found a metric row.
    pub joined: usize,
    /// `"<metric>~<feedback>"` to the correlation, absent when undefined
    /// (for example a constant column).
    pub correlations: BTreeMap<String, Option<Correlation>>,
    /// Leakage variant to its confusion ratios against reported leakage.
    pub leakage: BTreeMap<String, PrecisionRecall>,
}

/// Specificity of a metric row for a hint, or `None` when it does not
/// apply. Rows without a session id apply to every session, and rows
/// without a hint index apply to every hint of the chain.
fn match_rank(row: &MetricRow, hint: &HintView<'_>) -> Option<u8> {
    if row.question_id != hint.question || row.strategy != hint.strategy {
        return None;
    }
    let session = match &row.session_id {
        Some(s) if s == hint.session => 2,
        Some(_) => return None,
        None => 0,
    };
    let index = match row.hint_index {
        Some(i) if i == hint.hint_index => 1,
        Some(_) => return None,
        None => 0,
    };
    Some(session + index)
}

fn metric(row: &MetricRow, name: &str) -> f64 {
    let r = &row.report;
    match name {
        "InfoGain_mean" => r.info_gain_mean,
        "InfoGain_comb" => r.info_gain_comb,
        "Redundancy" => r.redundancy,
        "Consistency" => r.consistency,
        _ => unreachable!("unknown metric {name}"),
    }
}

pub fn alignment_report(log: &StudyLog, rows: &[MetricRow]) -> Result<AlignmentReport, AnalysisError> {
    let mut joined: Vec<(HintView<'_>, &MetricRow)> = Vec::new();
    for hint in log.hints() {
        if hint.satisfaction.is_none() && hint.informative.is_none() && hint.leaked.is_none() {
            continue;
        }
        let best = rows
            .iter()
            .filter_map(|r| match_rank(r, &hint).map(|rank| (rank, r)))
            .max_by_key(|(rank, _)| *rank);
        if let Some((_, row)) = best {
            joined.push((hint, row));
        }
    }
    if joined.is_empty() {
        return Err(AnalysisError::NoOverlap);
    }

    let mut correlations = BTreeMap::new();
    for (metric_name, feedback) in CORRELATION_PAIRS {
        let (xs, ys): (Vec<f64>, Vec<f64>) = joined
            .iter()
            .filter_map(|(h, r)| {
                let y = match feedback {
                    "informative" => h.informative.map(|b| b as u8 as f64),
                    _ => h.satisfaction.map(f64::from),
                }?;
                Some((metric(r, metric_name), y))
            })
            .unzip();
        correlations.insert(format!("{metric_name}~{feedback}"), pearson_test(&xs, &ys).ok());
    }

    let mut leakage = BTreeMap::new();
    let em: (Vec<bool>, Vec<bool>) = joined
        .iter()
        .filter_map(|(h, r)| Some((r.report.leakage_em == 1, h.leaked?)))
        .unzip();
    leakage.insert("Leakage_EM".to_string(), precision_recall(&em.0, &em.1)?);
    let llm: (Vec<bool>, Vec<bool>) = joined
        .iter()
        .filter_map(|(h, r)| Some((r.report.leakage_llm? == 1, h.leaked?)))
        .unzip();
    leakage.insert("Leakage_LLM".to_string(), precision_recall(&llm.0, &llm.1)?);

    Ok(AlignmentReport { joined: joined.len(), correlations, leakage })
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |v| format!("{v:.4}"))
}

impl AlignmentReport {
    pub fn render_text(&self) -> String {
        let mut out = format!("joined hint records: {}\n\ncorrelation                     r        p        n\n", self.joined);
        for (name, c) in &self.correlations {
            match c {
                Some(c) => out.push_str(&format!("{name:<30} {:>7.4}  {:>7}  {:>5}\n", c.r, opt(c.p), c.n)),
                None => out.push_str(&format!("{name:<30} {:>7}  {:>7}  {:>5}\n", "-", "-", "-")),
            }
        }
        out.push_str("\nleakage        precision  recall   tp   fp   fn   tn\n");
        for (name, pr) in &self.leakage {
            out.push_str(&format!(
                "{name:<14} {:>9}  {:>6}  {:>3}  {:>3}  {:>3}  {:>3}\n",
                opt(pr.precision),
                opt(pr.recall),
                pr.true_positive,
                pr.false_positive,
                pr.false_negative,
                pr.true_negative
            ));
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("kind,name,value_1,value_2,n\n");
        for (name, c) in &self.correlations {
            let (r, p, n) = c.map_or(("".into(), "".into(), "".into()), |c| {
                (c.r.to_string(), c.p.map(|p| p.to_string()).unwrap_or_default(), c.n.to_string())
            });
            out.push_str(&format!("correlation,{name},{r},{p},{n}\n"));
        }
        for (name, pr) in &self.leakage {
            let n = pr.true_positive + pr.false_positive + pr.false_negative + pr.true_negative;
            out.push_str(&format!(
                "precision_recall,{name},{},{},{n}\n",
                pr.precision.map(|v| v.to_string()).unwrap_or_default(),
                pr.recall.map(|v| v.to_string()).unwrap_or_default()
            ));
        }
        out
    }
}
