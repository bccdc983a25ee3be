//! Statistics over exported study logs.

pub mod align;
pub mod engagement;
pub mod log;
pub mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use align::{alignment_report, AlignmentReport};
pub use engagement::{engagement_tables, EngagementTables};
pub use log::{
    Condition, HintFeedback, Outcome, PostQuizSurvey, PreQuizSurvey, SectionSurvey, StrategyPreference,
    StudyLog, StudyRecord, STUDY_LOG_SCHEMA,
};
pub use stats::{
    chi_squared_2x2, mann_whitney, mann_whitney_with, midranks, pearson, pearson_test, precision_recall,
    ChiSquaredTest, Correlation, MannWhitney, PMethod, PrecisionRecall, StatError,
};

use crate::hints::HintStrategy;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no study records share a question and strategy with the metric rows")]
    NoOverlap,
    #[error(transparent)]
    Stat(#[from] StatError),
}

/// The headline comparisons of the study, each absent when its inputs are
/// degenerate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyStats {
    pub sessions: usize,
    pub rated_hints: usize,
    /// Satisfaction against informativeness (point-biserial).
    pub satisfaction_vs_informative: Option<Correlation>,
    /// Satisfaction, static against dynamic.
    pub satisfaction_by_strategy: Option<MannWhitney>,
    /// Strategy × informative.
    pub informative_by_strategy: Option<ChiSquaredTest>,
    /// Strategy × leaked.
    pub leaked_by_strategy: Option<ChiSquaredTest>,
}

pub fn study_stats(log: &StudyLog, yates: bool) -> StudyStats {
    let rated: Vec<_> = log.hints().filter(|h| h.satisfaction.is_some()).collect();
    let sessions = log
        .records
        .iter()
        .filter(|r| matches!(r, StudyRecord::PreQuiz { .. }))
        .count();

    let (sat, inf): (Vec<f64>, Vec<f64>) = rated
        .iter()
        .filter_map(|h| Some((h.satisfaction? as f64, h.informative? as u8 as f64)))
        .unzip();
    let by = |s: HintStrategy| -> Vec<f64> {
        rated.iter().filter(|h| h.strategy == s).filter_map(|h| h.satisfaction.map(f64::from)).collect()
    };
    let contingency = |field: fn(&log::HintView<'_>) -> Option<bool>| {
        let mut t = [[0u64; 2]; 2];
        for h in &rated {
            if let Some(v) = field(h) {
                let row = (h.strategy == HintStrategy::Dynamic) as usize;
                t[row][v as usize] += 1;
            }
        }
        chi_squared_2x2(t, yates).ok()
    };

    StudyStats {
        sessions,
        rated_hints: rated.len(),
        satisfaction_vs_informative: pearson_test(&sat, &inf).ok(),
        satisfaction_by_strategy: mann_whitney(&by(HintStrategy::Static), &by(HintStrategy::Dynamic)).ok(),
        informative_by_strategy: contingency(|h| h.informative),
        leaked_by_strategy: contingency(|h| h.leaked),
    }
}

impl StudyStats {
    /// One line per test: `test,statistic,p,effect,n`. Undefined tests
    /// have empty cells.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("test,statistic,p,effect,n\n");
        let cell = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
        let c = self.satisfaction_vs_informative.as_ref();
        out.push_str(&format!(
            "satisfaction~informative,{},{},{},{}\n",
            cell(c.map(|c| c.r)),
            cell(c.and_then(|c| c.p)),
            cell(c.map(|c| c.r)),
            c.map_or(String::new(), |c| c.n.to_string())
        ));
        let m = self.satisfaction_by_strategy.as_ref();
        out.push_str(&format!(
            "satisfaction_static_vs_dynamic,{},{},{},{}\n",
            cell(m.map(|m| m.u)),
            cell(m.map(|m| m.p_two_sided)),
            cell(m.map(|m| m.rank_biserial)),
            m.map_or(String::new(), |m| (m.n_a + m.n_b).to_string())
        ));
        for (name, t) in [("informative_by_strategy", &self.informative_by_strategy), ("leaked_by_strategy", &self.leaked_by_strategy)] {
            let t = t.as_ref();
            out.push_str(&format!(
                "{name},{},{},{},{}\n",
                cell(t.map(|t| t.chi2)),
                cell(t.map(|t| t.p)),
                cell(t.map(|t| t.cramers_v)),
                t.map_or(String::new(), |t| t.n.to_string())
            ));
        }
        out
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("sessions: {}\nrated hints: {}\n", self.sessions, self.rated_hints);
        match &self.satisfaction_vs_informative {
            Some(c) => out.push_str(&format!(
                "satisfaction ~ informative: r = {:.4}, p = {}, n = {}\n",
                c.r,
                c.p.map_or("-".into(), |p| format!("{p:.4}")),
                c.n
            )),
            None => out.push_str("satisfaction ~ informative: undefined\n"),
        }
        match &self.satisfaction_by_strategy {
            Some(m) => out.push_str(&format!(
                "satisfaction static vs dynamic: U = {}, p = {:.4} ({:?}), rank-biserial = {:.4}\n",
                m.u, m.p_two_sided, m.method, m.rank_biserial
            )),
            None => out.push_str("satisfaction static vs dynamic: undefined\n"),
        }
        for (name, t) in [("informative", &self.informative_by_strategy), ("leaked", &self.leaked_by_strategy)] {
            match t {
                Some(t) => out.push_str(&format!(
                    "{name} by strategy: chi2 = {:.4}, p = {:.4}, Cramer's V = {:.4}, n = {}\n",
                    t.chi2, t.p, t.cramers_v, t.n
                )),
                None => out.push_str(&format!("{name} by strategy: undefined\n")),
            }
        }
        out
    }
}
