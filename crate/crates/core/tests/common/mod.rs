//! Straightforward reference implementations used as test oracles.
//!
//! Everything here follows the textbook definitions directly, with plain
//! loops and no shared code with the library.

#![allow(dead_code)]

use clrnet::{FluorescenceRecording, ScoreMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Noise plus a few shared slow components, so pairs differ in strength.
pub fn random_recording(n: usize, t: usize, seed: u64) -> FluorescenceRecording {
    let mut r = rng(seed);
    let drivers: Vec<Vec<f64>> = (0..3).map(|_| (0..t).map(|_| r.random::<f64>()).collect()).collect();
    let traces = (0..n)
        .map(|_| {
            let w: Vec<f64> = (0..3).map(|_| r.random::<f64>()).collect();
            (0..t)
                .map(|k| {
                    let shared: f64 = (0..3).map(|d| w[d] * drivers[d][k]).sum();
                    shared + r.random::<f64>()
                })
                .collect()
        })
        .collect();
    FluorescenceRecording::from_traces(traces).unwrap()
}

pub fn random_symmetric(n: usize, r: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = r.random::<f64>() * 10.0 - 3.0;
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    s
}

pub fn to_matrix(rows: &[Vec<f64>], name: &str) -> ScoreMatrix {
    ScoreMatrix::from_rows(rows, name).unwrap()
}

pub fn rows_of(m: &ScoreMatrix) -> Vec<Vec<f64>> {
    (0..m.n()).map(|i| m.row(i).to_vec()).collect()
}

pub fn max_abs_diff(a: &ScoreMatrix, b: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in b.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((a.get(i, j) - v).abs());
        }
    }
    worst
}

pub fn naive_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for k in 0..x.len() {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Smallest element `v` with at most `alpha_pct`% of samples strictly above it.
pub fn naive_upper_quantile(x: &[f64], alpha_pct: f64) -> f64 {
    let n = x.len() as f64;
    let mut best = f64::INFINITY;
    for &v in x {
        let above = x.iter().filter(|&&w| w > v).count() as f64;
        if above / n <= alpha_pct / 100.0 * (1.0 + 1e-12) && v < best {
            best = v;
        }
    }
    best
}

pub fn naive_standardize(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|v| (v - m) / sd).collect()
    }
}

fn traces(rec: &FluorescenceRecording) -> Vec<Vec<f64>> {
    rec.traces().map(|t| t.to_vec()).collect()
}

pub fn naive_corr(rec: &FluorescenceRecording) -> Vec<Vec<f64>> {
    let x = traces(rec);
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i][j] = naive_pearson(&x[i], &x[j]).unwrap_or(0.0);
            }
        }
    }
    out
}

pub fn naive_ct(rec: &FluorescenceRecording, alpha_pct: f64) -> Vec<Vec<f64>> {
    let x = traces(rec);
    let n = x.len();
    let q: Vec<f64> = x.iter().map(|xi| naive_upper_quantile(xi, alpha_pct)).collect();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let frames: Vec<usize> = (0..x[i].len()).filter(|&t| x[i][t] >= q[i] || x[j][t] >= q[j]).collect();
            if frames.len() < 2 {
                continue;
            }
            let a: Vec<f64> = frames.iter().map(|&t| x[i][t]).collect();
            let b: Vec<f64> = frames.iter().map(|&t| x[j][t]).collect();
            out[i][j] = naive_pearson(&a, &b).unwrap_or(0.0);
        }
    }
    out
}

pub fn naive_md(rec: &FluorescenceRecording, alpha_pct: f64) -> Vec<Vec<f64>> {
    let xs: Vec<Vec<f64>> = traces(rec).iter().map(|x| naive_standardize(x)).collect();
    let n = xs.len();
    let directed = |i: usize, j: usize| {
        let f: Vec<f64> = xs[i].iter().zip(&xs[j]).map(|(a, b)| a - b).collect();
        let q = naive_upper_quantile(&f, alpha_pct);
        let picked: Vec<f64> = f.iter().filter(|&&v| v >= q).map(|v| v * v).collect();
        picked.iter().sum::<f64>() / picked.len() as f64
    };
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i][j] = directed(i, j).min(directed(j, i));
            }
        }
    }
    out
}

pub fn naive_rd(rec: &FluorescenceRecording, range_k: usize) -> Vec<Vec<f64>> {
    let x = traces(rec);
    let n = x.len();
    let mut r = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut d: Vec<f64> = x[i].iter().zip(&x[j]).map(|(a, b)| a - b).collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let k = range_k.min(d.len());
            let low = d[..k].iter().sum::<f64>() / k as f64;
            let high = d[d.len() - k..].iter().sum::<f64>() / k as f64;
            r[i][j] = high - low;
        }
    }
    let mut max = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max = max.max(r[i][j]);
            }
        }
    }
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i][j] = max - r[i][j];
            }
        }
    }
    out
}

/// CLR computed entry by entry, recomputing the row statistics each time.
pub fn naive_clr(s: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = s.len();
    let z = |i: usize, j: usize| {
        let others: Vec<f64> = (0..n).filter(|&k| k != i).map(|k| s[i][k]).collect();
        let m = others.iter().sum::<f64>() / others.len() as f64;
        let sd = (others.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / others.len() as f64).sqrt();
        if sd == 0.0 {
            0.0
        } else {
            ((s[i][j] - m) / sd).max(0.0)
        }
    };
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i][j] = (z(i, j).powi(2) + z(j, i).powi(2)).sqrt();
            }
        }
    }
    out
}

/// AUC by counting every positive/negative pair.
pub fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (a, &la) in scores.iter().zip(labels) {
        for (b, &lb) in scores.iter().zip(labels) {
            if la && !lb {
                pairs += 1.0;
                if a > b {
                    wins += 1.0;
                } else if a == b {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// AUPR as the sum over distinct thresholds of recall gain times precision.
pub fn sweep_aupr(scores: &[f64], labels: &[bool]) -> f64 {
    let positives = labels.iter().filter(|&&l| l).count() as f64;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut area = 0.0;
    let mut last_recall = 0.0;
    for th in thresholds {
        let selected: Vec<bool> = scores.iter().zip(labels).filter(|(s, _)| **s >= th).map(|(_, &l)| l).collect();
        let tp = selected.iter().filter(|&&l| l).count() as f64;
        let recall = tp / positives;
        area += (recall - last_recall) * tp / selected.len() as f64;
        last_recall = recall;
    }
    area
}

/// Two-sided signed-rank p-value by listing all 2^n sign patterns.
pub fn enumerate_wilcoxon(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    // doubled mean ranks, so all sums are integers
    let doubled: Vec<u64> = d
        .iter()
        .map(|v| {
            let less = d.iter().filter(|w| w.abs() < v.abs()).count() as u64;
            let equal = d.iter().filter(|w| w.abs() == v.abs()).count() as u64;
            2 * less + equal + 1
        })
        .collect();
    let observed: u64 = doubled.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let (mut low, mut high) = (0u64, 0u64);
    for pattern in 0u64..(1 << n) {
        let w: u64 = (0..n).filter(|&k| pattern >> k & 1 == 1).map(|k| doubled[k]).sum();
        if w <= observed {
            low += 1;
        }
        if w >= observed {
            high += 1;
        }
    }
    let total = (1u64 << n) as f64;
    (2.0 * low.min(high) as f64 / total).min(1.0)
}
