//! Information gain of a hint chain, measured through a QA model.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::rouge::rouge_l_recall_text;
use super::{undefined, MetricError};
use crate::client::{ModelClient, Role};
use crate::dataset::Question;
use crate::hints::HintChain;

/// `Literal` asks with each hint on its own for the per-hint term;
/// `Prefix` asks with hints 1..=i.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoGainMode {
    #[default]
    Literal,
    Prefix,
}

/// The QA prompt. With one hint supplied it is labelled `Hint 1`.
pub fn qa_prompt(question: &str, hints: &[&str]) -> String {
    let mut out = format!("Answer the following question succinctly:\n Question: {question}");
    for (i, h) in hints.iter().enumerate() {
        out.push_str(&format!("\n Hint {}: {}", i + 1, h));
    }
    out.push_str("\n Answer:");
    out
}

pub struct InfoGainEvaluator {
    client: Arc<ModelClient>,
    mode: InfoGainMode,
    baselines: Mutex<HashMap<String, f64>>,
}

impl InfoGainEvaluator {
    pub fn new(client: Arc<ModelClient>, mode: InfoGainMode) -> Self {
        Self { client, mode, baselines: Mutex::new(HashMap::new()) }
    }

    pub fn mode(&self) -> InfoGainMode {
        self.mode
    }

    async fn recall(&self, question: &Question, hints: &[&str]) -> Result<f64, MetricError> {
        let reply = self
            .client
            .complete(Role::QaEvaluator, &qa_prompt(&question.text, hints))
            .await?;
        rouge_l_recall_text(&reply, &question.answer)
    }

    /// Recall of the unhinted answer, computed once per question id.
    pub async fn baseline(&self, question: &Question) -> Result<f64, MetricError> {
        if let Some(v) = self.baselines.lock().unwrap().get(&question.id) {
            return Ok(*v);
        }
        let v = self.recall(question, &[]).await?;
        Ok(*self.baselines.lock().unwrap().entry(question.id.clone()).or_insert(v))
    }

    /// `(mean, comb)`.
    pub async fn evaluate(&self, question: &Question, chain: &HintChain) -> Result<(f64, f64), MetricError> {
        let texts = chain.texts();
        if texts.is_empty() {
            return Err(undefined("information gain of an empty chain"));
        }
        let base = self.baseline(question).await?;
        let mut per_hint = Vec::with_capacity(texts.len());
        for i in 0..texts.len() {
            let hints = match self.mode {
                InfoGainMode::Literal => &texts[i..=i],
                InfoGainMode::Prefix => &texts[..=i],
            };
            per_hint.push(self.recall(question, hints).await?);
        }
        let comb = match self.mode {
            InfoGainMode::Prefix => *per_hint.last().unwrap(),
            InfoGainMode::Literal if texts.len() == 1 => per_hint[0],
            InfoGainMode::Literal => self.recall(question, &texts).await?,
        };
        Ok(gains(base, &per_hint, comb))
    }
}

/// Per-hint and combined recalls minus the baseline.
pub fn gains(baseline: f64, per_hint: &[f64], combined: f64) -> (f64, f64) {
    let mean = per_hint.iter().map(|r| r - baseline).sum::<f64>() / per_hint.len() as f64;
    (mean, combined - baseline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::stub::StubTransport;
    use crate::client::{EndpointTable, RetryPolicy};
    use crate::dataset::Subject;
    use crate::hints::HintStrategy;

    fn question() -> Question {
        Question {
            id: "q1".into(),
            text: "What type of wave is sound?".into(),
            answer: "mechanical".into(),
            support: String::new(),
            subject: Subject::Physics,
        }
    }

    fn chain() -> HintChain {
        HintChain::from_texts("q1", HintStrategy::Static, &["h one", "h two", "h three", "h four"])
    }

    fn evaluator(stub: Arc<StubTransport>, mode: InfoGainMode) -> InfoGainEvaluator {
        let client = ModelClient::with_transport(EndpointTable::all_mock(), stub).retry(RetryPolicy::none());
        InfoGainEvaluator::new(Arc::new(client), mode)
    }

    fn hint_count(prompt: &str) -> usize {
        prompt.matches("\n Hint ").count()
    }

    #[test]
    fn prompt_format() {
        assert_eq!(
            qa_prompt("Q?", &["a", "b"]),
            "Answer the following question succinctly:\n Question: Q?\n Hint 1: a\n Hint 2: b\n Answer:"
        );
        assert_eq!(qa_prompt("Q?", &[]), "Answer the following question succinctly:\n Question: Q?\n Answer:");
    }

    #[tokio::test]
    async fn always_correct_qa_gains_nothing() {
        let e = evaluator(Arc::new(StubTransport::echo("mechanical")), InfoGainMode::Literal);
        assert_eq!(e.evaluate(&question(), &chain()).await.unwrap(), (0.0, 0.0));
    }

    #[tokio::test]
    async fn correct_with_any_hint() {
        let stub = StubTransport::new()
            .with_chat(|_, p| Ok(if hint_count(p) > 0 { "mechanical" } else { "no idea" }.into()));
        let e = evaluator(Arc::new(stub), InfoGainMode::Literal);
        assert_eq!(e.evaluate(&question(), &chain()).await.unwrap(), (1.0, 1.0));
    }

    #[tokio::test]
    async fn correct_only_with_all_hints() {
        let stub = StubTransport::new()
            .with_chat(|_, p| Ok(if hint_count(p) == 4 { "mechanical" } else { "no idea" }.into()));
        let literal = evaluator(Arc::new(stub), InfoGainMode::Literal);
        assert_eq!(literal.evaluate(&question(), &chain()).await.unwrap(), (0.0, 1.0));

        let stub = StubTransport::new()
            .with_chat(|_, p| Ok(if hint_count(p) == 4 { "mechanical" } else { "no idea" }.into()));
        let prefix = evaluator(Arc::new(stub), InfoGainMode::Prefix);
        assert_eq!(prefix.evaluate(&question(), &chain()).await.unwrap(), (0.25, 1.0));
    }

    #[tokio::test]
    async fn baseline_is_asked_once_per_question() {
        let stub = Arc::new(StubTransport::echo("no idea"));
        let e = evaluator(stub.clone(), InfoGainMode::Literal);
        e.evaluate(&question(), &chain()).await.unwrap();
        e.evaluate(&question(), &chain()).await.unwrap();
        let unhinted = stub.calls_for(Role::QaEvaluator).iter().filter(|p| hint_count(p) == 0).count();
        assert_eq!(unhinted, 1);
    }

    #[tokio::test]
    async fn empty_chain_is_undefined() {
        let e = evaluator(Arc::new(StubTransport::echo("x")), InfoGainMode::Literal);
        assert!(matches!(
            e.evaluate(&question(), &HintChain::empty("q1")).await,
            Err(MetricError::UndefinedMetric(_))
        ));
    }

    #[tokio::test]
    async fn qa_failure_propagates() {
        let e = evaluator(Arc::new(StubTransport::failing()), InfoGainMode::Literal);
        assert!(matches!(e.evaluate(&question(), &chain()).await, Err(MetricError::Client(_))));
    }
}
