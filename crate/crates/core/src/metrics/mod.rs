//! Automatic evaluation of hint chains.

pub mod consistency;
pub mod info_gain;
pub mod leakage;
pub mod readability;
pub mod redundancy;
pub mod report;
pub mod rouge;

use thiserror::Error;

use crate::client::ClientError;

pub use consistency::{consistency, AlignmentScorer, ConstantScorer, HttpAlignmentScorer, LexicalOverlapScorer};
pub use info_gain::{qa_prompt, InfoGainEvaluator, InfoGainMode};
pub use leakage::{leakage_em, leakage_em_hint_rate, LeakageJudge};
pub use readability::{readability, readability_of_text, Readability, TextCounts};
pub use redundancy::{cosine, redundancy, redundancy_of_embeddings};
pub use report::{aggregate, ChainEvaluator, ChainMetricReport, CorpusMetricTable, CorpusRow, MetricRow};
pub use rouge::{lcs_len, rouge_l_recall, rouge_l_recall_text, tokenize};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("judge verdict unparseable after retry: {raw:?}")]
    MetricJudgeError { raw: String },
    #[error("alignment scorer failed: {0}")]
    Scorer(String),
}

pub(crate) fn undefined(what: impl Into<String>) -> MetricError {
    MetricError::UndefinedMetric(what.into())
}
