//! Two-sided Wilcoxon signed-rank test.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest number of non-zero differences handled by the exact null distribution.
pub const EXACT_LIMIT: usize = 25;

/// Ascending ranks (1 = smallest) with ties sharing their mean rank.
pub(crate) fn ascending_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let mean_rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mean_rank;
        }
        start = end;
    }
    ranks
}

/// Ranks of the non-zero `|a - b|` and the sign of each difference.
pub(crate) fn signed_ranks(a: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput("non-finite paired difference".into()));
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    Ok((ascending_ranks(&magnitudes), diffs.iter().map(|d| *d > 0.0).collect()))
}

/// Two-sided p-value for the null hypothesis that `a - b` is symmetric about 0.
///
/// Zero differences are dropped. Up to [`EXACT_LIMIT`] remaining pairs the
/// null distribution of the positive rank sum is enumerated exactly (tied
/// ranks included); beyond that a continuity-corrected normal approximation
/// with tie correction is used. All-zero differences give p = 1.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    let (ranks, positive) = signed_ranks(a, b)?;
    let n = ranks.len();
    if n == 0 {
        return Ok(1.0);
    }
    let w_plus: f64 = ranks.iter().zip(&positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let p = if n <= EXACT_LIMIT {
        exact_p(&ranks, w_plus)
    } else {
        normal_p(&ranks, w_plus)
    };
    Ok(p.min(1.0))
}

fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    // mean ranks are multiples of 1/2, so doubled ranks are exact integers
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    let mut counts = vec![0u64; max_sum + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            let c = counts[s];
            if c > 0 {
                counts[s + r] += c;
            }
        }
        reach += r;
    }
    let observed = (2.0 * w_plus).round() as usize;
    let total = (1u64 << ranks.len()) as f64;
    let lower: u64 = counts[..=observed].iter().sum();
    let upper: u64 = counts[observed..].iter().sum();
    2.0 * (lower.min(upper) as f64 / total)
}

fn normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2)
}
