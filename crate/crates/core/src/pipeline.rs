//! End-to-end reconstruction workflow: features, CLR, sum, score.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::{parse_bool, parse_value, ApplyKey};
use crate::data::{FluorescenceRecording, GroundTruthNetwork, ScoreMatrix};
use crate::ensemble::{clr_sum, rank_sum};
use crate::error::{Error, Result};
use crate::evaluation::{compare_reports, evaluate, make_labels, render_reports, CurveMetric, EvaluationReport};
use crate::features::{corr_network, ct_network, md_network, rd_network, FeatureConfig};
use crate::gte::{gte_network, gte_sym_network, GteConfig};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Corr,
    Ct,
    Md,
    Rd,
    Gte,
    GteSym,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 6] = [
        FeatureKind::Corr,
        FeatureKind::Ct,
        FeatureKind::Md,
        FeatureKind::Rd,
        FeatureKind::Gte,
        FeatureKind::GteSym,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Corr => "corr",
            FeatureKind::Ct => "ct",
            FeatureKind::Md => "md",
            FeatureKind::Rd => "rd",
            FeatureKind::Gte => "gte",
            FeatureKind::GteSym => "gte_sym",
        }
    }

    pub fn is_symmetric(self) -> bool {
        self != FeatureKind::Gte
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown feature {s:?}; expected one of corr, ct, md, rd, gte, gte_sym"
                ))
            })
    }
}

/// Computes one feature network on the current rayon pool.
pub fn compute_feature(
    kind: FeatureKind,
    rec: &FluorescenceRecording,
    features: &FeatureConfig,
    gte: &GteConfig,
) -> Result<ScoreMatrix> {
    match kind {
        FeatureKind::Corr => Ok(corr_network(rec)),
        FeatureKind::Ct => ct_network(rec, features),
        FeatureKind::Md => md_network(rec, features),
        FeatureKind::Rd => rd_network(rec, features),
        FeatureKind::Gte => gte_network(rec, gte),
        FeatureKind::GteSym => gte_sym_network(rec, gte),
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = available parallelism).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub fluorescence: PathBuf,
    pub network: Option<PathBuf>,
    pub positions: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub dataset: String,
    pub features: FeatureConfig,
    pub gte: GteConfig,
    /// Ensemble members; all must be symmetric features.
    pub members: Vec<FeatureKind>,
    /// Extra networks computed and scored but not ensembled.
    pub baselines: Vec<FeatureKind>,
    pub workers: usize,
    pub include_inhibitory: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            fluorescence: PathBuf::new(),
            network: None,
            positions: None,
            output_dir: PathBuf::from("out"),
            dataset: "dataset".into(),
            features: FeatureConfig::default(),
            gte: GteConfig::default(),
            members: vec![FeatureKind::GteSym, FeatureKind::Ct, FeatureKind::Md, FeatureKind::Rd],
            baselines: vec![FeatureKind::Corr],
            workers: 0,
            include_inhibitory: false,
        }
    }
}

pub fn parse_feature_list(value: &str) -> Result<Vec<FeatureKind>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(FeatureKind::from_str)
        .collect()
}

impl ApplyKey for PipelineConfig {
    fn apply_key(&mut self, key: &str, value: &str) -> Result<bool> {
        if self.features.apply_key(key, value)? || self.gte.apply_key(key, value)? {
            return Ok(true);
        }
        match key {
            "fluorescence" => self.fluorescence = value.into(),
            "network" => self.network = Some(value.into()),
            "positions" => self.positions = Some(value.into()),
            "output_dir" => self.output_dir = value.into(),
            "dataset" => self.dataset = value.into(),
            "members" => self.members = parse_feature_list(value)?,
            "baselines" => self.baselines = parse_feature_list(value)?,
            "workers" => self.workers = parse_value(key, value)?,
            "include_inhibitory" => self.include_inhibitory = parse_bool(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::InvalidInput("ensemble member list is empty".into()));
        }
        if let Some(k) = self.members.iter().find(|k| !k.is_symmetric()) {
            return Err(Error::InvalidInput(format!(
                "ensemble member {k} is directed; use gte_sym"
            )));
        }
        self.features.validate()?;
        self.gte.validate()
    }
}

/// Everything the workflow produces, in memory.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Member networks followed by baselines, each computed once.
    pub networks: Vec<ScoreMatrix>,
    pub clrsum: ScoreMatrix,
    pub ranksum: ScoreMatrix,
    pub reports: Vec<EvaluationReport>,
    /// `(method_a, method_b, metric, p_value)` for CLRsum against every other method.
    pub comparisons: Vec<(String, String, CurveMetric, f64)>,
}

/// Runs the workflow on an in-memory recording using the current rayon pool.
pub fn run_on(
    rec: &FluorescenceRecording,
    truth: Option<&GroundTruthNetwork>,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let mut kinds: Vec<FeatureKind> = cfg.members.clone();
    for &b in &cfg.baselines {
        if !kinds.contains(&b) {
            kinds.push(b);
        }
    }
    let mut networks = Vec::with_capacity(kinds.len());
    for &kind in &kinds {
        log::info!("computing {kind} on {} neurons x {} frames", rec.neuron_count(), rec.frame_count());
        networks.push(compute_feature(kind, rec, &cfg.features, &cfg.gte)?);
    }
    let members: Vec<ScoreMatrix> = cfg
        .members
        .iter()
        .map(|k| networks[kinds.iter().position(|x| x == k).unwrap()].clone())
        .collect();
    let clrsum = clr_sum(&members)?;
    let ranksum = rank_sum(&members)?;

    let mut reports = Vec::new();
    let mut comparisons = Vec::new();
    if let Some(truth) = truth {
        if truth.neuron_count() != rec.neuron_count() {
            return Err(Error::DimensionMismatch {
                expected: rec.neuron_count(),
                found: truth.neuron_count(),
            });
        }
        let undirected = make_labels(truth, true, cfg.include_inhibitory);
        for m in networks.iter().chain([&clrsum, &ranksum]) {
            // the raw directed GTE is scored on ordered pairs
            let labels = if m.is_symmetric() {
                undirected.clone()
            } else {
                make_labels(truth, false, cfg.include_inhibitory)
            };
            reports.push(evaluate(m, &labels, &cfg.dataset)?);
        }
        let cs = reports.iter().find(|r| r.method == "clrsum").unwrap().clone();
        for other in reports.iter().filter(|r| r.method != "clrsum") {
            if other.per_link_contrib.keys().ne(cs.per_link_contrib.keys()) {
                continue;
            }
            for metric in [CurveMetric::Auc, CurveMetric::Aupr] {
                let p = compare_reports(&cs, other, metric)?;
                comparisons.push((cs.method.clone(), other.method.clone(), metric, p));
            }
        }
    }
    Ok(PipelineOutput {
        networks,
        clrsum,
        ranksum,
        reports,
        comparisons,
    })
}

pub fn render_comparisons(dataset: &str, comparisons: &[(String, String, CurveMetric, f64)]) -> String {
    let mut out = String::from("dataset,method_a,method_b,metric,p_value\n");
    for (a, b, metric, p) in comparisons {
        let metric = match metric {
            CurveMetric::Auc => "auc",
            CurveMetric::Aupr => "aupr",
        };
        out.push_str(&format!("{dataset},{a},{b},{metric},{}\n", io::format_real(*p)));
    }
    out
}

/// Files written by [`run`], relative to the output directory.
pub fn output_files(output: &PipelineOutput) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = output
        .networks
        .iter()
        .chain([&output.clrsum, &output.ranksum])
        .map(|m| (format!("{}.csv", m.name()), io::render_matrix(m)))
        .collect();
    if !output.reports.is_empty() {
        files.push(("report.csv".into(), render_reports(&output.reports)));
        let dataset = &output.reports[0].dataset;
        files.push(("comparisons.csv".into(), render_comparisons(dataset, &output.comparisons)));
    }
    files
}

/// Reads inputs, runs the workflow on `cfg.workers` threads and writes every
/// output only after all computation succeeded.
pub fn run(cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let mut rec = io::read_fluorescence(&cfg.fluorescence)?;
    if let Some(p) = &cfg.positions {
        rec = rec.with_positions(io::read_positions(p)?)?;
    }
    let truth = cfg
        .network
        .as_ref()
        .map(|p| io::read_network(p, rec.neuron_count()))
        .transpose()?;
    let output = with_workers(cfg.workers, || run_on(&rec, truth.as_ref(), cfg))??;
    write_outputs(&cfg.output_dir, &output)?;
    Ok(output)
}

pub fn write_outputs(dir: &Path, output: &PipelineOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, text) in output_files(output) {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
