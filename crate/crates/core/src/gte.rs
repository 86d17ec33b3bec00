//! Generalized transfer entropy (GTE).
//!
//! Traces are (optionally) differenced, discretized into equal-width bins and
//! fed to a plug-in transfer-entropy estimator. Two extensions over plain TE:
//!
//! * an instantaneous term: the source symbol at the target frame is
//!   appended to the source history, so same-frame interactions count;
//! * conditioning: only transitions whose whole window falls in frames with
//!   population-average fluorescence below a threshold are counted, which
//!   excludes network-wide bursts.
//!
//! Estimates are in bits.

use rayon::prelude::*;

use crate::data::{FluorescenceRecording, ScoreMatrix};
use crate::error::{Error, Result};

/// Largest dense joint-count table the estimator will allocate.
const MAX_STATES: usize = 1 << 24;

/// How per-level networks are combined when several conditioning levels are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LevelAggregation {
    #[default]
    Mean,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GteConfig {
    /// History length `k` for both source and target.
    pub markov_order: usize,
    /// Number of equal-width bins.
    pub bins: usize,
    /// Population-average thresholds; `f64::INFINITY` disables conditioning.
    pub conditioning_levels: Vec<f64>,
    pub level_aggregation: LevelAggregation,
    pub instant_feedback: bool,
    pub use_difference_signal: bool,
}

impl Default for GteConfig {
    fn default() -> Self {
        GteConfig {
            markov_order: 2,
            bins: 3,
            conditioning_levels: vec![f64::INFINITY],
            level_aggregation: LevelAggregation::Mean,
            instant_feedback: true,
            use_difference_signal: true,
        }
    }
}

impl GteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.markov_order < 1 {
            return Err(Error::InvalidInput("markov_order must be at least 1".into()));
        }
        if self.bins < 2 {
            return Err(Error::InvalidInput("bins must be at least 2".into()));
        }
        if self.conditioning_levels.is_empty() {
            return Err(Error::InvalidInput("at least one conditioning level is required".into()));
        }
        if self.conditioning_levels.iter().any(|g| g.is_nan()) {
            return Err(Error::InvalidInput("conditioning level is NaN".into()));
        }
        self.state_space()?;
        Ok(())
    }

    fn source_symbols(&self) -> usize {
        self.markov_order + usize::from(self.instant_feedback)
    }

    /// Sizes of the target-history and source-history alphabets.
    fn state_space(&self) -> Result<(usize, usize)> {
        let too_big = || {
            Error::InvalidInput(format!(
                "{} bins with markov order {} exceed the estimator's state space",
                self.bins, self.markov_order
            ))
        };
        let pow = |e: usize| u32::try_from(e).ok().and_then(|e| self.bins.checked_pow(e));
        let hd = pow(self.markov_order).ok_or_else(too_big)?;
        let hs = pow(self.source_symbols()).ok_or_else(too_big)?;
        let total = hd
            .checked_mul(hs)
            .and_then(|v| v.checked_mul(self.bins))
            .ok_or_else(too_big)?;
        if total > MAX_STATES {
            return Err(too_big());
        }
        Ok((hd, hs))
    }
}

/// Equal-width binning over `[min(x), max(x)]`; constant input maps to bin 0.
pub fn discretize(x: &[f64], bins: usize) -> Vec<u32> {
    assert!(bins >= 2, "need at least two bins");
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let width = hi - lo;
    if !(width > 0.0) {
        return vec![0; x.len()];
    }
    let top = (bins - 1) as u32;
    x.iter()
        .map(|&v| {
            let b = ((v - lo) / width * bins as f64).floor();
            (b as u32).min(top)
        })
        .collect()
}

/// Number of windows of `window` consecutive retained frames.
fn window_count(mask: &[bool], window: usize) -> usize {
    let mut run = 0usize;
    let mut count = 0usize;
    for &m in mask {
        run = if m { run + 1 } else { 0 };
        if run >= window {
            count += 1;
        }
    }
    count
}

/// Frames whose population-average fluorescence is below `level`.
///
/// Fails with [`Error::EmptyConditioning`] unless at least one run of
/// `markov_order + 1` consecutive frames is retained.
pub fn conditioning_mask(rec: &FluorescenceRecording, level: f64, markov_order: usize) -> Result<Vec<bool>> {
    let mask: Vec<bool> = rec.population_average().into_iter().map(|a| a < level).collect();
    if window_count(&mask, markov_order + 1) == 0 {
        return Err(Error::EmptyConditioning { level });
    }
    Ok(mask)
}

/// Target frames `t + 1` whose window `t - k + 1 ..= t + 1` is fully retained.
fn transition_targets(mask: &[bool], k: usize) -> Vec<usize> {
    let mut run = 0usize;
    let mut out = Vec::new();
    for (t, &m) in mask.iter().enumerate() {
        run = if m { run + 1 } else { 0 };
        if run > k {
            out.push(t);
        }
    }
    out
}

/// Base-`bins` code of `x[t - len + 1 ..= t]` for every `t >= len - 1`
/// (entries before that are 0 and never read).
fn history_codes(x: &[u32], len: usize, bins: usize) -> Vec<u32> {
    let modulus = (bins as u32).pow(len as u32);
    let mut codes = vec![0u32; x.len()];
    let mut code = 0u32;
    for (t, &v) in x.iter().enumerate() {
        code = (code * bins as u32 + v) % modulus;
        codes[t] = code;
    }
    codes
}

/// Precomputed symbol streams of one discretized trace.
struct Encoded {
    symbols: Vec<u32>,
    /// Target-side history code ending at each frame.
    history: Vec<u32>,
    /// Source-side code for a transition into each target frame.
    source: Vec<u32>,
}

impl Encoded {
    fn new(symbols: Vec<u32>, cfg: &GteConfig) -> Self {
        let k = cfg.markov_order;
        let history = history_codes(&symbols, k, cfg.bins);
        // source code for target frame u: history ending at u - 1, plus x[u] if instant
        let mut source = vec![0u32; symbols.len()];
        for u in k..symbols.len() {
            source[u] = if cfg.instant_feedback {
                history[u - 1] * cfg.bins as u32 + symbols[u]
            } else {
                history[u - 1]
            };
        }
        Encoded {
            symbols,
            history,
            source,
        }
    }
}

/// Plug-in estimator over precomputed codes; `counts` is reusable scratch.
fn te_from_codes(
    src: &Encoded,
    dst: &Encoded,
    targets: &[usize],
    bins: usize,
    hs_size: usize,
    counts: &mut Vec<u32>,
) -> f64 {
    counts.iter_mut().for_each(|c| *c = 0);
    for &u in targets {
        let idx = ((dst.history[u - 1] as usize * hs_size) + src.source[u] as usize) * bins
            + dst.symbols[u] as usize;
        counts[idx] += 1;
    }
    let hd_size = counts.len() / (hs_size * bins);
    let total = targets.len() as f64;
    let mut te = 0.0;
    let mut future_given_hist = vec![0u32; bins];
    for hd in 0..hd_size {
        let block = &counts[hd * hs_size * bins..(hd + 1) * hs_size * bins];
        future_given_hist.iter_mut().for_each(|c| *c = 0);
        let mut hist_total = 0u32;
        for cell in block.chunks_exact(bins) {
            for (f, &c) in cell.iter().enumerate() {
                future_given_hist[f] += c;
                hist_total += c;
            }
        }
        if hist_total == 0 {
            continue;
        }
        for cell in block.chunks_exact(bins) {
            let joint_total: u32 = cell.iter().sum();
            for (f, &c) in cell.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let ratio = (c as f64 * hist_total as f64)
                    / (joint_total as f64 * future_given_hist[f] as f64);
                te += c as f64 / total * ratio.log2();
            }
        }
    }
    te.max(0.0)
}

/// Transfer entropy `src -> dst` in bits from discretized sequences.
///
/// Only transitions whose full window (`k` history frames plus the target
/// frame) is retained by `mask` are counted.
pub fn transfer_entropy(src: &[u32], dst: &[u32], mask: &[bool], cfg: &GteConfig) -> Result<f64> {
    cfg.validate()?;
    let (hd_size, hs_size) = cfg.state_space()?;
    if src.len() != dst.len() || src.len() != mask.len() {
        return Err(Error::DimensionMismatch {
            expected: dst.len(),
            found: src.len().max(mask.len()),
        });
    }
    let k = cfg.markov_order;
    if dst.len() < k + 2 {
        return Err(Error::InsufficientData(format!(
            "{} frames is too short for markov order {k}",
            dst.len()
        )));
    }
    if src.iter().chain(dst).any(|&s| s as usize >= cfg.bins) {
        return Err(Error::InvalidInput(format!("symbol outside 0..{}", cfg.bins)));
    }
    let targets = transition_targets(mask, k);
    if targets.is_empty() {
        return Err(Error::InsufficientData("no transition window inside the mask".into()));
    }
    let src = Encoded::new(src.to_vec(), cfg);
    let dst = Encoded::new(dst.to_vec(), cfg);
    let mut counts = vec![0u32; hd_size * hs_size * cfg.bins];
    Ok(te_from_codes(&src, &dst, &targets, cfg.bins, hs_size, &mut counts))
}

/// Directed GTE network: `values[i][j]` is the transfer entropy `i -> j`.
pub fn gte_network(rec: &FluorescenceRecording, cfg: &GteConfig) -> Result<ScoreMatrix> {
    cfg.validate()?;
    let (hd_size, hs_size) = cfg.state_space()?;
    let n = rec.neuron_count();
    let k = cfg.markov_order;

    let encoded: Vec<Encoded> = rec
        .traces()
        .map(|x| {
            let signal: Vec<f64> = if cfg.use_difference_signal {
                x.windows(2).map(|w| w[1] - w[0]).collect()
            } else {
                x.to_vec()
            };
            Encoded::new(discretize(&signal, cfg.bins), cfg)
        })
        .collect();
    let len = encoded[0].symbols.len();
    if len < k + 2 {
        return Err(Error::InsufficientData(format!(
            "{} frames is too short for markov order {k}",
            rec.frame_count()
        )));
    }

    let mut level_targets = Vec::with_capacity(cfg.conditioning_levels.len());
    for &level in &cfg.conditioning_levels {
        let targets = conditioning_mask(rec, level, k).map(|mask| {
            let mask: Vec<bool> = if cfg.use_difference_signal {
                // a difference frame spans two raw frames; both must be retained
                mask.windows(2).map(|w| w[0] && w[1]).collect()
            } else {
                mask
            };
            transition_targets(&mask, k)
        });
        level_targets.push(targets.ok().filter(|t| !t.is_empty()));
    }
    if level_targets.iter().all(Option::is_none) {
        return Err(Error::EmptyConditioning {
            level: cfg.conditioning_levels[0],
        });
    }
    for (level, targets) in cfg.conditioning_levels.iter().zip(&level_targets) {
        if targets.is_none() {
            log::warn!("conditioning level {level} leaves no usable transitions; its GTE scores are 0");
        }
    }

    let table = hd_size * hs_size * cfg.bins;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map_init(
            || vec![0u32; table],
            |counts, i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            return 0.0;
                        }
                        let per_level = level_targets.iter().map(|targets| match targets {
                            Some(t) => te_from_codes(&encoded[i], &encoded[j], t, cfg.bins, hs_size, counts),
                            None => 0.0,
                        });
                        match cfg.level_aggregation {
                            LevelAggregation::Mean => {
                                per_level.sum::<f64>() / level_targets.len() as f64
                            }
                            LevelAggregation::Max => per_level.fold(0.0, f64::max),
                        }
                    })
                    .collect()
            },
        )
        .collect();
    Ok(ScoreMatrix::from_parts_unchecked(rows.concat(), n, false, "gte"))
}

/// Conservative symmetrization: `min(m[i][j], m[j][i])` for both entries.
pub fn symmetrize_min(m: &ScoreMatrix) -> ScoreMatrix {
    let n = m.n();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m.get(i, j).min(m.get(j, i));
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    ScoreMatrix::from_parts_unchecked(values, n, true, &format!("{}_sym", m.name()))
}

/// Feature 1: the min-symmetrized GTE network.
pub fn gte_sym_network(rec: &FluorescenceRecording, cfg: &GteConfig) -> Result<ScoreMatrix> {
    Ok(symmetrize_min(&gte_network(rec, cfg)?))
}
