//! Token-level ROUGE-L recall.

use super::{undefined, MetricError};

/// Lowercase and split on anything that is not a letter or digit.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS(candidate, reference) / |reference|.
pub fn rouge_l_recall<T: PartialEq>(candidate: &[T], reference: &[T]) -> Result<f64, MetricError> {
    if reference.is_empty() {
        return Err(undefined("ROUGE-L recall against an empty reference"));
    }
    Ok(lcs_len(candidate, reference) as f64 / reference.len() as f64)
}

pub fn rouge_l_recall_text(candidate: &str, reference: &str) -> Result<f64, MetricError> {
    rouge_l_recall(&tokenize(candidate), &tokenize(reference))
}
