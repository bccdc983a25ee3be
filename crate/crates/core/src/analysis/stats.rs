//! Correlation, rank-sum, contingency and confusion-matrix statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatError {
    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

fn undefined(what: impl Into<String>) -> StatError {
    StatError::UndefinedStatistic(what.into())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample Pearson coefficient. With one series in {0, 1} this is the
/// point-biserial correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatError> {
    if x.len() != y.len() {
        return Err(StatError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(undefined("correlation needs at least two pairs"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(undefined("zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub n: usize,
    /// Two-sided, from Student's t with n − 2 degrees of freedom.
    pub p: Option<f64>,
}

pub fn pearson_test(x: &[f64], y: &[f64]) -> Result<Correlation, StatError> {
    let r = pearson(x, y)?;
    let n = x.len();
    let p = (n > 2).then(|| {
        if r.abs() >= 1.0 {
            return 0.0;
        }
        let df = (n - 2) as f64;
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * dist.sf(t.abs())).min(1.0)
    });
    Ok(Correlation { r, n, p })
}

/// 1-based ranks, ties sharing the mean of the positions they span.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    /// Exact permutation distribution of the (midranked) rank sum.
    Exact,
    /// Normal approximation with tie-corrected variance, no continuity
    /// correction.
    Normal,
}

/// Pooled sizes above this use the normal approximation by default.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U for the first group.
    pub u: f64,
    pub p_two_sided: f64,
    /// 1 − 2U/(n_a·n_b).
    pub rank_biserial: f64,
    pub method: PMethod,
    pub n_a: usize,
    pub n_b: usize,
}

pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatError> {
    let method = if a.len() + b.len() > EXACT_MAX_N { PMethod::Normal } else { PMethod::Exact };
    mann_whitney_with(a, b, method)
}

pub fn mann_whitney_with(a: &[f64], b: &[f64], method: PMethod) -> Result<MannWhitney, StatError> {
    if a.is_empty() || b.is_empty() {
        return Err(undefined("rank-sum test needs two non-empty groups"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(undefined("non-finite observation"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u = rank_sum_a - na * (na + 1.0) / 2.0;
    let p_two_sided = match method {
        PMethod::Normal => normal_p(u, &pooled, a.len(), b.len()),
        PMethod::Exact => exact_p(&ranks, a.len(), rank_sum_a),
    };
    Ok(MannWhitney {
        u,
        p_two_sided,
        rank_biserial: 1.0 - 2.0 * u / (na * nb),
        method,
        n_a: a.len(),
        n_b: b.len(),
    })
}

fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        total += t * t * t - t;
        i = j;
    }
    total
}

fn normal_p(u: f64, pooled: &[f64], na: usize, nb: usize) -> f64 {
    let (n1, n2) = (na as f64, nb as f64);
    let n = n1 + n2;
    let mu = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term(pooled) / (n * (n - 1.0)).max(1.0));
    if var <= 0.0 {
        return 1.0;
    }
    let z = (u - mu) / var.sqrt();
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * std.sf(z.abs())).min(1.0)
}

/// Exact two-sided p: the share of all size-`na` subsets of the pooled
/// midranks whose rank sum is at least as far from its mean as observed.
fn exact_p(ranks: &[f64], na: usize, observed: f64) -> f64 {
    // Midranks are multiples of 1/2, so doubled ranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // counts[k][s]: subsets of size k with doubled sum s.
    let mut counts = vec![vec![0f64; max_sum + 1]; na + 1];
    counts[0][0] = 1.0;
    for &d in &doubled {
        for k in (1..=na).rev() {
            for s in (d..=max_sum).rev() {
                let add = counts[k - 1][s - d];
                if add > 0.0 {
                    counts[k][s] += add;
                }
            }
        }
    }
    let total: f64 = counts[na].iter().sum();
    let n = ranks.len() as f64;
    let centre = 2.0 * na as f64 * (n + 1.0) / 2.0;
    let dev = (2.0 * observed - centre).abs();
    let extreme: f64 = counts[na]
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s as f64 - centre).abs() >= dev - 1e-9)
        .map(|(_, c)| c)
        .sum();
    (extreme / total).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredTest {
    pub chi2: f64,
    pub p: f64,
    pub cramers_v: f64,
    pub n: u64,
    pub yates: bool,
}

/// Pearson χ² on a 2×2 table with df = 1, optionally with Yates'
/// continuity correction.
pub fn chi_squared_2x2(table: [[u64; 2]; 2], yates: bool) -> Result<ChiSquaredTest, StatError> {
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let n = rows[0] + rows[1];
    let mut chi2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = rows[i] as f64 * cols[j] as f64 / n.max(1) as f64;
            if expected == 0.0 {
                return Err(undefined("zero expected count"));
            }
            let mut diff = (table[i][j] as f64 - expected).abs();
            if yates {
                diff = (diff - 0.5).max(0.0);
            }
            chi2 += diff * diff / expected;
        }
    }
    let dist = ChiSquared::new(1.0).expect("df = 1");
    Ok(ChiSquaredTest {
        chi2,
        p: dist.sf(chi2).clamp(0.0, 1.0),
        cramers_v: (chi2 / n as f64).sqrt().min(1.0),
        n,
        yates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    /// Absent when nothing was predicted positive.
    pub precision: Option<f64>,
    /// Absent when the truth has no positives.
    pub recall: Option<f64>,
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub true_negative: usize,
}

pub fn precision_recall(pred: &[bool], truth: &[bool]) -> Result<PrecisionRecall, StatError> {
    if pred.len() != truth.len() {
        return Err(StatError::LengthMismatch(pred.len(), truth.len()));
    }
    let mut c = [[0usize; 2]; 2];
    for (p, t) in pred.iter().zip(truth) {
        c[*p as usize][*t as usize] += 1;
    }
    let (tp, fp, fn_, tn) = (c[1][1], c[1][0], c[0][1], c[0][0]);
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(PrecisionRecall {
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        true_positive: tp,
        false_positive: fp,
        false_negative: fn_,
        true_negative: tn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-9);
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(StatError::UndefinedStatistic(_))));
        assert!(matches!(pearson(&[1.0], &[1.0, 2.0]), Err(StatError::LengthMismatch(1, 2))));
    }

    #[test]
    fn mann_whitney_examples() {
        let r = mann_whitney(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!((r.u, r.rank_biserial), (0.0, 1.0));
        // Exact: 2 of the 6 splits are as extreme.
        assert!((r.p_two_sided - 2.0 / 6.0).abs() < 1e-12);
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.u, r.rank_biserial), (4.5, 0.0));
        assert!((r.p_two_sided - 1.0).abs() < 1e-12);
        assert!(mann_whitney(&[], &[1.0]).is_err());
    }

    #[test]
    fn midranks_share_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), [3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn chi_squared_examples() {
        let t = chi_squared_2x2([[10, 10], [10, 10]], false).unwrap();
        assert_eq!((t.chi2, t.cramers_v), (0.0, 0.0));
        let t = chi_squared_2x2([[20, 0], [0, 20]], false).unwrap();
        assert!((t.chi2 - 40.0).abs() < 1e-12 && (t.cramers_v - 1.0).abs() < 1e-12);
        let t = chi_squared_2x2([[12, 8], [6, 14]], false).unwrap();
        assert!((t.chi2 - 40.0 / 11.0).abs() < 1e-9);
        assert!(chi_squared_2x2([[0, 0], [3, 4]], false).is_err());
    }

    #[test]
    fn precision_recall_examples() {
        let pr = precision_recall(&[true, false, true], &[true, false, true]).unwrap();
        assert_eq!((pr.precision, pr.recall), (Some(1.0), Some(1.0)));
        let pr = precision_recall(&[true; 4], &[true, false, false, false]).unwrap();
        assert_eq!((pr.precision, pr.recall), (Some(0.25), Some(1.0)));
        let pr = precision_recall(&[false, false, true], &[true; 3]).unwrap();
        assert_eq!(pr.precision, Some(1.0));
        assert!((pr.recall.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(precision_recall(&[false], &[true]).unwrap().precision, None);
    }
}
