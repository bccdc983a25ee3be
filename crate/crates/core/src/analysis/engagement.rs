//! How participants used hints: distributions and satisfaction means.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::log::{Condition, Outcome, StudyLog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    /// `static`, `dynamic`, `control` or `all`.
    pub group: String,
    pub value: usize,
    pub count: usize,
    /// Percentage of the group total.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub group: String,
    pub bucket: usize,
    pub n: usize,
    pub mean_satisfaction: f64,
}

/// Groups and buckets with no observations are left out, never zero-filled.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngagementTables {
    /// Hints shown on closed questions where at least one hint was requested.
    pub hints_used: Vec<ShareRow>,
    /// Attempts used on questions answered correctly.
    pub attempts_to_resolution: Vec<ShareRow>,
    /// Mean hint satisfaction by the number of wrong attempts before the hint.
    pub satisfaction_by_attempts: Vec<MeanRow>,
    pub satisfaction_by_hint_index: Vec<MeanRow>,
}

fn shares(groups: BTreeMap<String, BTreeMap<usize, usize>>) -> Vec<ShareRow> {
    let mut out = Vec::new();
    for (group, buckets) in groups {
        let total: usize = buckets.values().sum();
        if total == 0 {
            continue;
        }
        for (value, count) in buckets {
            out.push(ShareRow { group: group.clone(), value, count, share: 100.0 * count as f64 / total as f64 });
        }
    }
    out
}

fn means(groups: BTreeMap<String, BTreeMap<usize, (usize, f64)>>) -> Vec<MeanRow> {
    groups
        .into_iter()
        .flat_map(|(group, buckets)| {
            buckets.into_iter().map(move |(bucket, (n, sum))| MeanRow {
                group: group.clone(),
                bucket,
                n,
                mean_satisfaction: sum / n as f64,
            })
        })
        .collect()
}

/// Per-condition groups followed by an `all` group over the hinted
/// conditions.
fn keys(condition: Condition) -> [String; 2] {
    [condition.to_string(), "all".to_string()]
}

pub fn engagement_tables(log: &StudyLog) -> EngagementTables {
    let mut hints_used: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut resolution: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
    for s in log.summaries() {
        if s.outcome == Outcome::Open {
            continue;
        }
        if s.hints_shown > 0 {
            for k in keys(s.condition) {
                *hints_used.entry(k).or_default().entry(s.hints_shown).or_default() += 1;
            }
        }
        if s.outcome == Outcome::Correct {
            let mut groups = vec![s.condition.to_string()];
            if s.condition != Condition::Control {
                groups.push("all".into());
            }
            for k in groups {
                *resolution.entry(k).or_default().entry(s.attempts_used).or_default() += 1;
            }
        }
    }

    let mut by_attempts: BTreeMap<String, BTreeMap<usize, (usize, f64)>> = BTreeMap::new();
    let mut by_index: BTreeMap<String, BTreeMap<usize, (usize, f64)>> = BTreeMap::new();
    for h in log.hints() {
        let Some(sat) = h.satisfaction else { continue };
        for k in keys(h.strategy.into()) {
            let slot = by_attempts.entry(k.clone()).or_default().entry(h.attempts_before_hint).or_default();
            slot.0 += 1;
            slot.1 += sat as f64;
            let slot = by_index.entry(k).or_default().entry(h.hint_index).or_default();
            slot.0 += 1;
            slot.1 += sat as f64;
        }
    }

    EngagementTables {
        hints_used: shares(hints_used),
        attempts_to_resolution: shares(resolution),
        satisfaction_by_attempts: means(by_attempts),
        satisfaction_by_hint_index: means(by_index),
    }
}

impl EngagementTables {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (title, rows) in [("hints used", &self.hints_used), ("attempts to resolution", &self.attempts_to_resolution)] {
            out.push_str(&format!("{title}\ngroup     value  count   share\n"));
            for r in rows {
                out.push_str(&format!("{:<8}  {:>5}  {:>5}  {:>5.1}%\n", r.group, r.value, r.count, r.share));
            }
            out.push('\n');
        }
        for (title, rows) in [
            ("satisfaction by prior attempts", &self.satisfaction_by_attempts),
            ("satisfaction by hint index", &self.satisfaction_by_hint_index),
        ] {
            out.push_str(&format!("{title}\ngroup     bucket      n   mean\n"));
            for r in rows {
                out.push_str(&format!("{:<8}  {:>6}  {:>5}  {:>5.3}\n", r.group, r.bucket, r.n, r.mean_satisfaction));
            }
            out.push('\n');
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("table,group,bucket,count,value\n");
        for (name, rows) in [("hints_used", &self.hints_used), ("attempts_to_resolution", &self.attempts_to_resolution)] {
            for r in rows {
                out.push_str(&format!("{name},{},{},{},{}\n", r.group, r.value, r.count, r.share));
            }
        }
        for (name, rows) in [
            ("satisfaction_by_attempts", &self.satisfaction_by_attempts),
            ("satisfaction_by_hint_index", &self.satisfaction_by_hint_index),
        ] {
            for r in rows {
                out.push_str(&format!("{name},{},{},{},{}\n", r.group, r.bucket, r.n, r.mean_satisfaction));
            }
        }
        out
    }
}
