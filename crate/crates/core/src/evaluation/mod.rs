//! Scoring reconstructed networks against known connectivity.
//!
//! ROC AUC is computed exactly as the Mann-Whitney statistic and AUPR as a
//! non-interpolated step sum over a descending sweep, with tied scores
//! handled as one block in both. Each positive link's share of either area
//! is exposed so two methods can be compared with a paired Wilcoxon test.

mod wilcoxon;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

pub use wilcoxon::{wilcoxon_signed_rank, EXACT_LIMIT};

use crate::data::{GroundTruthNetwork, ScoreMatrix};
use crate::error::{Error, Result};
use crate::io::format_real;

/// A neuron pair, 0-based. Undirected links are stored with `i < j`.
pub type LinkId = (usize, usize);

/// Which pairs count as true links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    neuron_count: usize,
    directed: bool,
    positives: BTreeSet<LinkId>,
}

impl LabelMap {
    pub fn neuron_count(&self) -> usize {
        self.neuron_count
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn positive_count(&self) -> usize {
        self.positives.len()
    }

    pub fn is_positive(&self, i: usize, j: usize) -> bool {
        let key = if self.directed { (i, j) } else { (i.min(j), i.max(j)) };
        self.positives.contains(&key)
    }

    /// Every pair this map labels, in row-major order.
    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        let n = self.neuron_count;
        let directed = self.directed;
        (0..n).flat_map(move |i| {
            let start = if directed { 0 } else { i + 1 };
            (start..n).filter(move |&j| j != i).map(move |j| (i, j))
        })
    }
}

/// Labels pairs from ground truth. Inhibitory edges count only when
/// `include_inhibitory` is set.
pub fn make_labels(truth: &GroundTruthNetwork, undirected: bool, include_inhibitory: bool) -> LabelMap {
    let positives = truth
        .edges()
        .filter(|e| e.weight > 0 || include_inhibitory)
        .map(|e| {
            if undirected {
                (e.source.min(e.target), e.source.max(e.target))
            } else {
                (e.source, e.target)
            }
        })
        .collect();
    LabelMap {
        neuron_count: truth.neuron_count(),
        directed: !undirected,
        positives,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledLink {
    pub link: LinkId,
    pub score: f64,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledScores {
    pub entries: Vec<LabeledLink>,
}

impl LabeledScores {
    pub fn new(entries: Vec<LabeledLink>) -> Self {
        LabeledScores { entries }
    }

    /// Convenience constructor; links are numbered `(k, k)` by position.
    pub fn from_pairs(scores: &[f64], labels: &[bool]) -> Self {
        let entries = scores
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(k, (&score, &label))| LabeledLink {
                link: (k, k),
                score,
                label,
            })
            .collect();
        LabeledScores { entries }
    }

    /// Pairs every labeled link with its score in `m`.
    pub fn from_matrix(m: &ScoreMatrix, labels: &LabelMap) -> Result<Self> {
        if m.n() != labels.neuron_count() {
            return Err(Error::DimensionMismatch {
                expected: labels.neuron_count(),
                found: m.n(),
            });
        }
        let entries = labels
            .links()
            .map(|(i, j)| LabeledLink {
                link: (i, j),
                score: m.get(i, j),
                label: labels.is_positive(i, j),
            })
            .collect();
        Ok(LabeledScores { entries })
    }

    fn class_counts(&self) -> (usize, usize) {
        let pos = self.entries.iter().filter(|e| e.label).count();
        (pos, self.entries.len() - pos)
    }

    /// Entries sorted by score, ascending or descending, ties adjacent.
    fn sorted(&self, descending: bool) -> Vec<LabeledLink> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| {
            let ord = a.score.total_cmp(&b.score);
            if descending { ord.reverse() } else { ord }
        });
        v
    }
}

/// Splits sorted entries into blocks of equal score.
fn tie_blocks(sorted: &[LabeledLink]) -> impl Iterator<Item = &[LabeledLink]> {
    sorted.chunk_by(|a, b| a.score == b.score)
}

fn require_both_classes(ls: &LabeledScores) -> Result<(usize, usize)> {
    let (pos, neg) = ls.class_counts();
    if pos == 0 {
        return Err(Error::SingleClass("no positive links"));
    }
    if neg == 0 {
        return Err(Error::SingleClass("no negative links"));
    }
    Ok((pos, neg))
}

/// Per-positive Mann-Whitney counts: negatives below plus half the tied ones.
fn mann_whitney_counts(ls: &LabeledScores) -> Vec<(LinkId, f64)> {
    let sorted = ls.sorted(false);
    let mut negatives_below = 0usize;
    let mut out = Vec::new();
    for block in tie_blocks(&sorted) {
        let tied_negatives = block.iter().filter(|e| !e.label).count();
        let credit = negatives_below as f64 + 0.5 * tied_negatives as f64;
        out.extend(block.iter().filter(|e| e.label).map(|e| (e.link, credit)));
        negatives_below += tied_negatives;
    }
    out
}

/// Area under the ROC curve: P(score_pos > score_neg) + P(tie) / 2.
pub fn roc_auc(ls: &LabeledScores) -> Result<f64> {
    let (pos, neg) = require_both_classes(ls)?;
    let wins: f64 = mann_whitney_counts(ls).into_iter().map(|(_, c)| c).sum();
    Ok(wins / (pos as f64 * neg as f64))
}

/// Each positive link's share of [`roc_auc`]; the shares sum to the AUC.
pub fn auc_contributions(ls: &LabeledScores) -> Result<BTreeMap<LinkId, f64>> {
    let (pos, neg) = require_both_classes(ls)?;
    let pairs = pos as f64 * neg as f64;
    Ok(mann_whitney_counts(ls)
        .into_iter()
        .map(|(link, c)| (link, c / pairs))
        .collect())
}

/// Precision at the block containing each positive.
fn precision_steps(ls: &LabeledScores) -> Vec<(LinkId, f64)> {
    let sorted = ls.sorted(true);
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut out = Vec::new();
    for block in tie_blocks(&sorted) {
        tp += block.iter().filter(|e| e.label).count();
        seen += block.len();
        let precision = tp as f64 / seen as f64;
        out.extend(block.iter().filter(|e| e.label).map(|e| (e.link, precision)));
    }
    out
}

/// Area under the precision-recall curve by non-interpolated step summation.
pub fn aupr(ls: &LabeledScores) -> Result<f64> {
    let (pos, _) = ls.class_counts();
    if pos == 0 {
        return Err(Error::SingleClass("no positive links"));
    }
    let area: f64 = precision_steps(ls).into_iter().map(|(_, p)| p).sum();
    Ok(area / pos as f64)
}

/// Each positive link's share of [`aupr`].
pub fn aupr_contributions(ls: &LabeledScores) -> Result<BTreeMap<LinkId, f64>> {
    let (pos, _) = ls.class_counts();
    if pos == 0 {
        return Err(Error::SingleClass("no positive links"));
    }
    Ok(precision_steps(ls)
        .into_iter()
        .map(|(link, p)| (link, p / pos as f64))
        .collect())
}

/// Metrics of one method on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub dataset: String,
    pub method: String,
    pub auc: f64,
    pub aupr: f64,
    /// AUC contribution of every positive link.
    pub per_link_contrib: BTreeMap<LinkId, f64>,
    /// AUPR contribution of every positive link.
    pub per_link_pr_contrib: BTreeMap<LinkId, f64>,
}

pub fn evaluate(m: &ScoreMatrix, labels: &LabelMap, dataset: &str) -> Result<EvaluationReport> {
    let ls = LabeledScores::from_matrix(m, labels)?;
    Ok(EvaluationReport {
        dataset: dataset.to_string(),
        method: m.name().to_string(),
        auc: roc_auc(&ls)?,
        aupr: aupr(&ls)?,
        per_link_contrib: auc_contributions(&ls)?,
        per_link_pr_contrib: aupr_contributions(&ls)?,
    })
}

/// Which area the paired comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMetric {
    Auc,
    Aupr,
}

/// Wilcoxon p-value between two methods' per-link contributions on the
/// same dataset and labels.
pub fn compare_reports(a: &EvaluationReport, b: &EvaluationReport, metric: CurveMetric) -> Result<f64> {
    let pick = |r: &EvaluationReport| match metric {
        CurveMetric::Auc => r.per_link_contrib.clone(),
        CurveMetric::Aupr => r.per_link_pr_contrib.clone(),
    };
    let (ca, cb) = (pick(a), pick(b));
    if !ca.keys().eq(cb.keys()) {
        return Err(Error::InvalidInput(format!(
            "{} and {} were scored on different positive links",
            a.method, b.method
        )));
    }
    let va: Vec<f64> = ca.into_values().collect();
    let vb: Vec<f64> = cb.into_values().collect();
    wilcoxon_signed_rank(&va, &vb)
}

pub const REPORT_HEADER: &str = "dataset,method,auc,aupr";

pub fn render_reports(reports: &[EvaluationReport]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        writeln!(out, "{},{},{},{}", r.dataset, r.method, format_real(r.auc), format_real(r.aupr)).unwrap();
    }
    out
}

/// `i,j,auc_contribution,aupr_contribution` rows with 1-based indices.
pub fn render_contributions(r: &EvaluationReport) -> String {
    let mut out = String::from("i,j,auc_contribution,aupr_contribution\n");
    for (&(i, j), c) in &r.per_link_contrib {
        let pr = r.per_link_pr_contrib.get(&(i, j)).copied().unwrap_or(0.0);
        writeln!(out, "{},{},{},{}", i + 1, j + 1, format_real(*c), format_real(pr)).unwrap();
    }
    out
}
