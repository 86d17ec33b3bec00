//! Pairwise similarity networks computed directly from fluorescence traces.
//!
//! * [`corr_network`]: plain Pearson correlation
//! * [`ct_network`]: correlation restricted to the frames where either
//!   neuron is at its extreme upper quantile
//! * [`md_network`]: mean squared difference of standardized traces on the
//!   frames where they disagree the most, symmetrized by the minimum
//! * [`rd_network`]: robust range of the raw difference signal, inverted so
//!   that higher means more similar
//!
//! Every kernel evaluates each unordered pair independently, in parallel
//! over rows on the current rayon pool, with a fixed per-pair reduction
//! order. Output is therefore identical at any worker count.

use rayon::prelude::*;

use crate::data::{FluorescenceRecording, ScoreMatrix};
use crate::error::{Error, Result};
use crate::stats::{lower_quantile_in_place, pearson_iter, standardize, upper_quantile, upper_quantile_in_place, SummaryStats};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    /// Quantile level in percent for CT and MD.
    pub alpha_pct: f64,
    /// Number of extreme values averaged at each end by RD.
    pub range_k: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            alpha_pct: 0.1,
            range_k: 10,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_pct > 0.0 && self.alpha_pct < 100.0) {
            return Err(Error::InvalidInput(format!(
                "alpha_pct must lie in (0, 100), got {}",
                self.alpha_pct
            )));
        }
        if self.range_k == 0 {
            return Err(Error::InvalidInput("range_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Evaluates `score(i, j, scratch)` for every `i < j` and mirrors it.
pub(crate) fn pairwise_symmetric<S, I, F>(n: usize, name: &str, init: I, score: F) -> ScoreMatrix
where
    I: Fn() -> S + Sync + Send,
    F: Fn(usize, usize, &mut S) -> f64 + Sync + Send,
{
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map_init(&init, |scratch, i| {
            ((i + 1)..n).map(|j| score(i, j, scratch)).collect()
        })
        .collect();
    ScoreMatrix::from_upper_rows(n, upper, name)
}

/// Pearson correlation between every pair of traces; constant traces score 0.
pub fn corr_network(rec: &FluorescenceRecording) -> ScoreMatrix {
    // centered traces and their norms, so each pair is a single dot product
    let centered: Vec<(Vec<f64>, f64)> = rec
        .traces()
        .map(|x| {
            let mean = SummaryStats::of(x).map_or(0.0, |s| s.mean);
            let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            (c, norm)
        })
        .collect();
    pairwise_symmetric(rec.neuron_count(), "corr", || (), |i, j, _| {
        let (ci, ni) = &centered[i];
        let (cj, nj) = &centered[j];
        if *ni == 0.0 || *nj == 0.0 {
            return 0.0;
        }
        let dot: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
        (dot / (ni * nj)).clamp(-1.0, 1.0)
    })
}

/// Frames where `x` is at or above its upper `alpha_pct` quantile, ascending.
fn extreme_frames(x: &[f64], alpha_pct: f64) -> Vec<usize> {
    let q = upper_quantile(x, alpha_pct);
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v >= q)
        .map(|(t, _)| t)
        .collect()
}

/// Merges two ascending index lists without duplicates.
fn sorted_union(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let (mut p, mut q) = (0, 0);
    while p < a.len() && q < b.len() {
        match a[p].cmp(&b[q]) {
            std::cmp::Ordering::Less => {
                out.push(a[p]);
                p += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[q]);
                q += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[p]);
                p += 1;
                q += 1;
            }
        }
    }
    out.extend_from_slice(&a[p..]);
    out.extend_from_slice(&b[q..]);
}

/// Correlation of each pair restricted to the union of both neurons'
/// extreme frames. Pairs with fewer than two such frames, or a constant
/// restricted signal, score 0.
pub fn ct_network(rec: &FluorescenceRecording, cfg: &FeatureConfig) -> Result<ScoreMatrix> {
    cfg.validate()?;
    let extremes: Vec<Vec<usize>> = rec.traces().map(|x| extreme_frames(x, cfg.alpha_pct)).collect();
    Ok(pairwise_symmetric(rec.neuron_count(), "ct", Vec::new, |i, j, frames| {
        sorted_union(&extremes[i], &extremes[j], frames);
        let (xi, xj) = (rec.trace(i), rec.trace(j));
        pearson_iter(frames.iter().map(|&t| (xi[t], xj[t]))).unwrap_or(0.0)
    }))
}

struct MdScratch {
    diff: Vec<f64>,
    select: Vec<f64>,
}

/// Masked mean squared difference of standardized traces.
///
/// For the ordered pair `(i, j)` the frames kept are those where
/// `Xs_i - Xs_j` reaches its upper quantile; `(j, i)` keeps the frames where
/// the difference is most negative. The score is the smaller of the two
/// means of the squared difference.
pub fn md_network(rec: &FluorescenceRecording, cfg: &FeatureConfig) -> Result<ScoreMatrix> {
    cfg.validate()?;
    let scaled: Vec<Vec<f64>> = rec.traces().map(standardize).collect();
    let frames = rec.frame_count();
    let alpha = cfg.alpha_pct;
    let init = || MdScratch {
        diff: vec![0.0; frames],
        select: vec![0.0; frames],
    };
    Ok(pairwise_symmetric(rec.neuron_count(), "md", init, |i, j, s| {
        for ((d, a), b) in s.diff.iter_mut().zip(&scaled[i]).zip(&scaled[j]) {
            *d = a - b;
        }
        s.select.copy_from_slice(&s.diff);
        let hi = upper_quantile_in_place(&mut s.select, alpha);
        let lo = lower_quantile_in_place(&mut s.select, alpha);
        let (mut sum_hi, mut n_hi, mut sum_lo, mut n_lo) = (0.0, 0usize, 0.0, 0usize);
        for &d in &s.diff {
            if d >= hi {
                sum_hi += d * d;
                n_hi += 1;
            }
            if d <= lo {
                sum_lo += d * d;
                n_lo += 1;
            }
        }
        let m_ij = sum_hi / n_hi as f64;
        let m_ji = sum_lo / n_lo as f64;
        m_ij.min(m_ji)
    }))
}

/// Mean of the top `k` minus mean of the bottom `k` values; reorders `buf`.
fn robust_range(buf: &mut [f64], k: usize) -> f64 {
    let n = buf.len();
    let k = k.min(n);
    if k < n {
        buf.select_nth_unstable_by(n - k, f64::total_cmp);
    }
    let top = &mut buf[n - k..];
    top.sort_unstable_by(f64::total_cmp);
    let top_mean = top.iter().sum::<f64>() / k as f64;
    if k < n {
        buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    }
    let bottom = &mut buf[..k];
    bottom.sort_unstable_by(f64::total_cmp);
    let bottom_mean = bottom.iter().sum::<f64>() / k as f64;
    top_mean - bottom_mean
}

/// Robust range of the raw difference signal, inverted as `max(R) - R`
/// over off-diagonal entries, with a zero diagonal.
pub fn rd_network(rec: &FluorescenceRecording, cfg: &FeatureConfig) -> Result<ScoreMatrix> {
    cfg.validate()?;
    let frames = rec.frame_count();
    let range = pairwise_symmetric(rec.neuron_count(), "rd", || vec![0.0; frames], |i, j, buf| {
        for ((d, a), b) in buf.iter_mut().zip(rec.trace(i)).zip(rec.trace(j)) {
            *d = a - b;
        }
        robust_range(buf, cfg.range_k)
    });
    Ok(invert_off_diagonal(&range, "rd"))
}

/// `max(R) - R` over off-diagonal entries; diagonal stays 0.
fn invert_off_diagonal(r: &ScoreMatrix, name: &str) -> ScoreMatrix {
    let n = r.n();
    let max = r.upper_triangle().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i * n + j] = max - r.get(i, j);
            }
        }
    }
    ScoreMatrix::from_parts_unchecked(values, n, r.is_symmetric(), name)
}
