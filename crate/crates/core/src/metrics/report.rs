//! Per-chain metric reports and corpus tables.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::consistency::{consistency, AlignmentScorer};
use super::info_gain::{InfoGainEvaluator, InfoGainMode};
use super::leakage::{leakage_em, leakage_em_hint_rate, LeakageJudge};
use super::readability::{readability, Readability};
use super::redundancy::redundancy;
use super::MetricError;
use crate::client::ModelClient;
use crate::dataset::Question;
use crate::hints::{HintChain, HintStrategy};
use crate::prompts::PromptSet;

/// Readability is reported but not part of the aggregate.
pub fn aggregate(info_gain_comb: f64, consistency: f64, redundancy: f64, leakage_em: f64) -> f64 {
    (info_gain_comb + consistency + (1.0 - redundancy) + (1.0 - leakage_em)) / 4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMetricReport {
    pub info_gain_mean: f64,
    pub info_gain_comb: f64,
    pub redundancy: f64,
    pub consistency: f64,
    pub leakage_em: u8,
    /// Fraction of hints with an exact answer match.
    pub leakage_em_hint_rate: f64,
    /// `None` when the judge never produced a parseable verdict.
    pub leakage_llm: Option<u8>,
    pub readability: Option<Readability>,
    pub aggregate: f64,
}

impl ChainMetricReport {
    pub fn recompute_aggregate(&self) -> f64 {
        aggregate(self.info_gain_comb, self.consistency, self.redundancy, self.leakage_em as f64)
    }
}

/// One evaluated chain, as written to `rows.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub question_id: String,
    /// Set when the chain was shown in a particular study session.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    /// Set when the row scores a single hint rather than the whole chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint_index: Option<usize>,
    pub model_id: String,
    pub strategy: HintStrategy,
    pub hints: Vec<String>,
    pub report: ChainMetricReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Means of one (model, strategy) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub model_id: String,
    pub strategy: HintStrategy,
    pub questions: usize,
    pub info_gain_mean: f64,
    pub info_gain_comb: f64,
    pub redundancy: f64,
    pub consistency: f64,
    pub readability_dc: Option<f64>,
    pub leakage_em: f64,
    pub leakage_em_hint_rate: f64,
    pub leakage_llm: Option<f64>,
    pub aggregate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetricTable {
    pub rows: Vec<CorpusRow>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl CorpusMetricTable {
    /// Arithmetic means per (model, strategy), ordered by model then
    /// strategy. Rows with no judge verdict are left out of the
    /// Leakage_LLM mean only.
    pub fn from_rows(rows: &[MetricRow]) -> Self {
        let mut groups: BTreeMap<(String, HintStrategy), Vec<&MetricRow>> = BTreeMap::new();
        for row in rows {
            groups.entry((row.model_id.clone(), row.strategy)).or_default().push(row);
        }
        let rows = groups
            .into_iter()
            .map(|((model_id, strategy), rs)| {
                let m = |f: fn(&ChainMetricReport) -> f64| mean(rs.iter().map(|r| f(&r.report))).unwrap_or(0.0);
                CorpusRow {
                    model_id,
                    strategy,
                    questions: rs.len(),
                    info_gain_mean: m(|r| r.info_gain_mean),
                    info_gain_comb: m(|r| r.info_gain_comb),
                    redundancy: m(|r| r.redundancy),
                    consistency: m(|r| r.consistency),
                    readability_dc: mean(rs.iter().filter_map(|r| r.report.readability.map(|x| x.dale_chall))),
                    leakage_em: m(|r| r.leakage_em as f64),
                    leakage_em_hint_rate: m(|r| r.leakage_em_hint_rate),
                    leakage_llm: mean(rs.iter().filter_map(|r| r.report.leakage_llm.map(f64::from))),
                    aggregate: m(|r| r.aggregate),
                }
            })
            .collect();
        Self { rows }
    }
}

/// Computes every metric for a chain.
pub struct ChainEvaluator {
    client: Arc<ModelClient>,
    info_gain: InfoGainEvaluator,
    judge: LeakageJudge,
    scorer: Arc<dyn AlignmentScorer>,
}

impl ChainEvaluator {
    pub fn new(
        client: Arc<ModelClient>,
        prompts: Arc<PromptSet>,
        scorer: Arc<dyn AlignmentScorer>,
        mode: InfoGainMode,
    ) -> Self {
        Self {
            info_gain: InfoGainEvaluator::new(client.clone(), mode),
            judge: LeakageJudge::new(client.clone(), prompts),
            client,
            scorer,
        }
    }

    /// Endpoint and scorer failures abort the chain. An unparseable
    /// leakage verdict or undefined readability only flags it.
    pub async fn evaluate(
        &self,
        question: &Question,
        chain: &HintChain,
    ) -> Result<(ChainMetricReport, Vec<String>), MetricError> {
        let mut flags = Vec::new();
        let (info_gain_mean, info_gain_comb) = self.info_gain.evaluate(question, chain).await?;
        let redundancy = redundancy(&self.client, chain).await?;
        let consistency = consistency(chain, question, self.scorer.as_ref()).await?;
        let leak_em = leakage_em(chain, &question.answer);
        let leakage_llm = match self.judge.judge(question, chain).await {
            Ok(v) => Some(v),
            Err(MetricError::MetricJudgeError { raw }) => {
                tracing::warn!(question = %question.id, raw = %raw, "leakage judge unparseable");
                flags.push("leakage_llm_unparseable".to_string());
                None
            }
            Err(e) => return Err(e),
        };
        let readability = match readability(chain) {
            Ok(r) => Some(r),
            Err(_) => {
                flags.push("readability_undefined".to_string());
                None
            }
        };
        let report = ChainMetricReport {
            info_gain_mean,
            info_gain_comb,
            redundancy,
            consistency,
            leakage_em: leak_em,
            leakage_em_hint_rate: leakage_em_hint_rate(chain, &question.answer),
            leakage_llm,
            readability,
            aggregate: aggregate(info_gain_comb, consistency, redundancy, leak_em as f64),
        };
        Ok((report, flags))
    }
}
