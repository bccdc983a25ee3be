//! Factual consistency of a chain against its supporting passage.

use std::collections::BTreeSet;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::rouge::tokenize;
use super::{undefined, MetricError};
use crate::dataset::Question;
use crate::hints::HintChain;

/// Maps `(context, claim)` to an alignment probability in [0, 1].
#[async_trait]
pub trait AlignmentScorer: Send + Sync {
    fn name(&self) -> &str;
    async fn score(&self, context: &str, claim: &str) -> Result<f64, MetricError>;
}

/// `|claim ∩ context| / |claim|` over lowercase word sets. An empty claim
/// is trivially supported.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalOverlapScorer;

impl LexicalOverlapScorer {
    pub fn overlap(context: &str, claim: &str) -> f64 {
        let ctx: BTreeSet<String> = tokenize(context).into_iter().collect();
        let claim: BTreeSet<String> = tokenize(claim).into_iter().collect();
        if claim.is_empty() {
            return 1.0;
        }
        claim.iter().filter(|w| ctx.contains(*w)).count() as f64 / claim.len() as f64
    }
}

#[async_trait]
impl AlignmentScorer for LexicalOverlapScorer {
    fn name(&self) -> &str {
        "lexical"
    }

    async fn score(&self, context: &str, claim: &str) -> Result<f64, MetricError> {
        Ok(Self::overlap(context, claim))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub f64);

#[async_trait]
impl AlignmentScorer for ConstantScorer {
    fn name(&self) -> &str {
        "constant"
    }

    async fn score(&self, _context: &str, _claim: &str) -> Result<f64, MetricError> {
        Ok(self.0)
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    context: &'a str,
    claim: &'a str,
}

#[derive(Deserialize)]
struct ScoreResponse {
    score: f64,
}

/// An external alignment model behind `POST {url}` taking
/// `{"context", "claim"}` and answering `{"score"}`.
#[derive(Debug, Clone)]
pub struct HttpAlignmentScorer {
    url: String,
    http: reqwest::Client,
    timeout: Duration,
}

impl HttpAlignmentScorer {
    pub fn new(url: impl Into<String>) -> Self {
        Self { url: url.into(), http: reqwest::Client::new(), timeout: Duration::from_secs(60) }
    }

    pub fn timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

#[async_trait]
impl AlignmentScorer for HttpAlignmentScorer {
    fn name(&self) -> &str {
        "http"
    }

    async fn score(&self, context: &str, claim: &str) -> Result<f64, MetricError> {
        let resp = self
            .http
            .post(&self.url)
            .timeout(self.timeout)
            .json(&ScoreRequest { context, claim })
            .send()
            .await
            .map_err(|e| MetricError::Scorer(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(MetricError::Scorer(format!("status {}", resp.status())));
        }
        let body: ScoreResponse = resp.json().await.map_err(|e| MetricError::Scorer(e.to_string()))?;
        if !body.score.is_finite() {
            return Err(MetricError::Scorer("non-finite score".into()));
        }
        Ok(body.score.clamp(0.0, 1.0))
    }
}

/// Context is the support passage, or question and answer when the
/// passage is empty.
pub fn consistency_context(question: &Question) -> String {
    if question.support.trim().is_empty() {
        format!("{} {}", question.text, question.answer)
    } else {
        question.support.clone()
    }
}

pub async fn consistency(
    chain: &HintChain,
    question: &Question,
    scorer: &dyn AlignmentScorer,
) -> Result<f64, MetricError> {
    if chain.k() == 0 {
        return Err(undefined("consistency of an empty chain"));
    }
    let claim = chain.texts().join(" ");
    let s = scorer.score(&consistency_context(question), &claim).await?;
    Ok(s.clamp(0.0, 1.0))
}
