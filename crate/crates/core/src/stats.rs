//! Elementary statistics shared by every feature kernel.
//!
//! Variances use the population (divide-by-n) convention throughout.
//! Summation is always performed left to right in index order so results
//! are reproducible bit-for-bit.

use crate::error::{Error, Result};

/// Mean and population standard deviation of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl SummaryStats {
    /// Returns `None` for an empty slice.
    pub fn of(x: &[f64]) -> Option<Self> {
        Self::of_iter(x.iter().copied())
    }

    pub fn of_iter<I>(values: I) -> Option<Self>
    where
        I: Iterator<Item = f64> + Clone,
    {
        let mut count = 0usize;
        let mut sum = 0.0;
        for v in values.clone() {
            sum += v;
            count += 1;
        }
        if count == 0 {
            return None;
        }
        let mean = sum / count as f64;
        let mut ss = 0.0;
        for v in values {
            let d = v - mean;
            ss += d * d;
        }
        Some(SummaryStats {
            mean,
            std: (ss / count as f64).sqrt(),
            count,
        })
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Pearson correlation coefficient of two equally long samples.
///
/// Fails with [`Error::DegenerateInput`] when either sample has zero variance.
/// The result is symmetric in its arguments bit-for-bit.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput("correlation needs at least two samples"));
    }
    pearson_iter(x.iter().copied().zip(y.iter().copied()))
        .ok_or(Error::DegenerateInput("zero variance"))
}

/// Correlation over an iterator of paired samples; `None` when degenerate.
pub(crate) fn pearson_iter<I>(pairs: I) -> Option<f64>
where
    I: Iterator<Item = (f64, f64)> + Clone,
{
    let mut n = 0usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (a, b) in pairs.clone() {
        sx += a;
        sy += b;
        n += 1;
    }
    if n < 2 {
        return None;
    }
    let mx = sx / n as f64;
    let my = sy / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in pairs {
        let da = a - mx;
        let db = b - my;
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Number of samples allowed strictly above the upper `alpha_pct` quantile.
fn count_above(len: usize, alpha_pct: f64) -> usize {
    // The relative slack absorbs representation error in products such as 0.1 * 1000 / 100.
    let m = (alpha_pct / 100.0 * len as f64 * (1.0 + 1e-12)).floor() as usize;
    m.min(len - 1)
}

/// The smallest element `v` of `x` such that at most `alpha_pct` percent of
/// the samples are strictly greater than `v`.
///
/// This is an order statistic: the result is always an element of `x`.
///
/// # Panics
/// If `x` is empty or `alpha_pct` is outside `(0, 100)`.
pub fn upper_quantile(x: &[f64], alpha_pct: f64) -> f64 {
    let mut scratch = x.to_vec();
    upper_quantile_in_place(&mut scratch, alpha_pct)
}

/// Same as [`upper_quantile`] but reorders `buf` instead of allocating.
pub fn upper_quantile_in_place(buf: &mut [f64], alpha_pct: f64) -> f64 {
    assert!(!buf.is_empty(), "quantile of an empty sample");
    assert!(
        alpha_pct > 0.0 && alpha_pct < 100.0,
        "alpha_pct must lie in (0, 100), got {alpha_pct}"
    );
    let idx = buf.len() - 1 - count_above(buf.len(), alpha_pct);
    *buf.select_nth_unstable_by(idx, f64::total_cmp).1
}

/// The mirror of [`upper_quantile`]: equals `-upper_quantile(-x)`.
pub(crate) fn lower_quantile_in_place(buf: &mut [f64], alpha_pct: f64) -> f64 {
    assert!(!buf.is_empty(), "quantile of an empty sample");
    let idx = count_above(buf.len(), alpha_pct);
    *buf.select_nth_unstable_by(idx, f64::total_cmp).1
}

/// Centers and scales to mean 0 and population standard deviation 1.
/// A constant input maps to all zeros.
pub fn standardize(x: &[f64]) -> Vec<f64> {
    let Some(stats) = SummaryStats::of(x) else {
        return Vec::new();
    };
    if stats.std == 0.0 {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| (v - stats.mean) / stats.std).collect()
}
