//! Self-referenced redundancy: how close each hint sits to its nearest
//! sibling in embedding space.

use super::{undefined, MetricError};
use crate::client::ModelClient;
use crate::hints::HintChain;

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Mean over hints of the largest cosine to any other hint, each cosine
/// clamped to [0, 1]. A single hint has no sibling and scores 0.
pub fn redundancy_of_embeddings(embeddings: &[Vec<f64>]) -> Result<f64, MetricError> {
    let k = embeddings.len();
    match k {
        0 => Err(undefined("redundancy of an empty chain")),
        1 => Ok(0.0),
        _ => {
            let total: f64 = (0..k)
                .map(|i| {
                    (0..k)
                        .filter(|&j| j != i)
                        .map(|j| cosine(&embeddings[i], &embeddings[j]).clamp(0.0, 1.0))
                        .fold(0.0, f64::max)
                })
                .sum();
            Ok(total / k as f64)
        }
    }
}

pub async fn redundancy(client: &ModelClient, chain: &HintChain) -> Result<f64, MetricError> {
    if chain.k() == 0 {
        return Err(undefined("redundancy of an empty chain"));
    }
    if chain.k() == 1 {
        return Ok(0.0);
    }
    let texts: Vec<String> = chain.hints.iter().map(|h| h.text.clone()).collect();
    let embeddings = client.embed(&texts).await?;
    redundancy_of_embeddings(&embeddings)
}
