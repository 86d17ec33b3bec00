//! CLR normalization and the two network combination rules.

use rayon::prelude::*;

use crate::data::ScoreMatrix;
use crate::error::{Error, Result};
use crate::stats::SummaryStats;

/// Context likelihood of relatedness.
///
/// Each row `i` is standardized against its own off-diagonal mean and
/// population standard deviation, negative z-scores are clamped to zero,
/// and the two directions are combined as `sqrt(z_i(j)^2 + z_j(i)^2)`.
/// Rows with zero spread contribute z = 0.
pub fn clr(s: &ScoreMatrix) -> Result<ScoreMatrix> {
    s.check_symmetric()?;
    let n = s.n();
    let z: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = s.row(i);
            let off_diag = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v);
            let Some(stats) = SummaryStats::of_iter(off_diag) else {
                return vec![0.0; n];
            };
            row.iter()
                .enumerate()
                .map(|(j, &v)| {
                    if j == i || stats.std == 0.0 {
                        0.0
                    } else {
                        ((v - stats.mean) / stats.std).max(0.0)
                    }
                })
                .collect()
        })
        .collect();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| {
                    let (a, b) = (z[i][j], z[j][i]);
                    (a * a + b * b).sqrt()
                })
                .collect()
        })
        .collect();
    Ok(ScoreMatrix::from_upper_rows(n, upper, &format!("clr_{}", s.name())))
}

fn check_members(networks: &[ScoreMatrix]) -> Result<usize> {
    let first = networks
        .first()
        .ok_or_else(|| Error::InvalidInput("ensemble needs at least one network".into()))?;
    let n = first.n();
    for m in networks {
        if m.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.n(),
            });
        }
        m.check_symmetric()?;
    }
    Ok(n)
}

/// Elementwise sum of the CLR of every member, in member order.
pub fn clr_sum(networks: &[ScoreMatrix]) -> Result<ScoreMatrix> {
    let n = check_members(networks)?;
    let mut total = vec![0.0; n * n];
    for m in networks {
        let normalized = clr(m)?;
        for (t, v) in total.iter_mut().zip(normalized.values()) {
            *t += v;
        }
    }
    Ok(ScoreMatrix::from_parts_unchecked(total, n, true, "clrsum"))
}

/// Descending ranks (1 = largest) with tied values sharing their mean rank.
pub fn descending_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let mean_rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mean_rank;
        }
        start = end;
    }
    ranks
}

/// Rank aggregation baseline: each link's score is the negated sum of its
/// per-network ranks, so higher still means stronger.
pub fn rank_sum(networks: &[ScoreMatrix]) -> Result<ScoreMatrix> {
    let n = check_members(networks)?;
    let links = n * (n - 1) / 2;
    let mut sums = vec![0.0; links];
    for m in networks {
        for (s, r) in sums.iter_mut().zip(descending_ranks(&m.upper_triangle())) {
            *s += r;
        }
    }
    let mut values = vec![0.0; n * n];
    let mut link = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            values[i * n + j] = -sums[link];
            values[j * n + i] = -sums[link];
            link += 1;
        }
    }
    Ok(ScoreMatrix::from_parts_unchecked(values, n, true, "ranksum"))
}
