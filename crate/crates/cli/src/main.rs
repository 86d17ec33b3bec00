//! `clrnet` command-line front end.
//!
//! Every command reads its inputs and computes its result before writing
//! anything, so a failed run leaves no partial output behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use clrnet::config::{apply_all, read_key_values, ApplyKey};
use clrnet::ensemble::{clr_sum, rank_sum};
use clrnet::evaluation::{evaluate, make_labels, render_contributions, render_reports};
use clrnet::gte::LevelAggregation;
use clrnet::io;
use clrnet::pipeline::{self, compute_feature, with_workers, FeatureKind, PipelineConfig};
use clrnet::synth::{disjoint_chains, generate, generate_with_network};
use clrnet::{FeatureConfig, GteConfig, ScoreMatrix, SynthConfig};

#[derive(Parser)]
#[command(name = "clrnet", version, about = "Reconstruct neural connectivity from calcium fluorescence recordings")]
struct Cli {
    /// Worker threads; 0 uses all available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// Settings shared by commands that take `key = value` parameters.
#[derive(Args)]
struct Settings {
    /// `key = value` config file, applied first.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one key, e.g. `--set noise_std=0.05`; may repeat.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (fluorescence, network, positions).
    Simulate {
        #[command(flatten)]
        settings: Settings,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        neurons: Option<usize>,
        #[arg(long)]
        frames: Option<usize>,
        /// Use this many disjoint A->B->C chains instead of a random graph.
        #[arg(long)]
        chains: Option<usize>,
    },
    /// Compute one feature network from a fluorescence file.
    Feature {
        /// corr, ct, md, rd, gte or gte_sym.
        name: String,
        #[command(flatten)]
        settings: Settings,
        #[arg(long)]
        fluorescence: PathBuf,
        /// Output matrix; parameters go to `<out>.meta`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        alpha_pct: Option<f64>,
        #[arg(long)]
        range_k: Option<usize>,
        #[arg(long)]
        markov_order: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        /// Comma-separated levels, or `none`.
        #[arg(long, allow_hyphen_values = true)]
        conditioning_levels: Option<String>,
    },
    /// Combine symmetric score matrices.
    Ensemble {
        #[arg(value_enum)]
        method: EnsembleMethod,
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Score a matrix against a ground-truth network.
    Score {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value = "dataset")]
        dataset: String,
        /// Label ordered pairs instead of unordered ones.
        #[arg(long)]
        directed: bool,
        /// Count inhibitory edges as positives.
        #[arg(long)]
        include_inhibitory: bool,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-link AUC and AUPR contributions here.
        #[arg(long)]
        contributions: Option<PathBuf>,
    },
    /// Write a matrix as a challenge submission file.
    ExportChallenge {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        net_id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run features, CLR, sum and scoring in one go.
    Pipeline {
        #[command(flatten)]
        settings: Settings,
        #[arg(long)]
        fluorescence: Option<PathBuf>,
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long)]
        positions: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<String>,
        /// Comma-separated ensemble members.
        #[arg(long)]
        members: Option<String>,
        /// Comma-separated extra networks to score.
        #[arg(long)]
        baselines: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleMethod {
    Clrsum,
    Ranksum,
}

/// Config file, then `--set`, then dedicated flags, so flags win.
fn collect_settings(settings: &Settings, flags: Vec<(&str, Option<String>)>) -> Result<Vec<(usize, String, String)>> {
    let mut pairs = match &settings.config {
        Some(path) => read_key_values(path)?,
        None => Vec::new(),
    };
    for item in &settings.set {
        let (k, v) = item
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got {item:?}"))?;
        pairs.push((0, k.trim().to_string(), v.trim().to_string()));
    }
    for (key, value) in flags {
        if let Some(v) = value {
            pairs.push((0, key.to_string(), v));
        }
    }
    Ok(pairs)
}

fn some_string<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Default)]
struct FeatureParams {
    features: FeatureConfig,
    gte: GteConfig,
}

impl ApplyKey for FeatureParams {
    fn apply_key(&mut self, key: &str, value: &str) -> clrnet::Result<bool> {
        Ok(self.features.apply_key(key, value)? || self.gte.apply_key(key, value)?)
    }
}

fn metadata(kind: FeatureKind, input: &Path, m: &ScoreMatrix, frames: usize, p: &FeatureParams) -> String {
    let mut out = String::new();
    let levels: Vec<String> = p.gte.conditioning_levels.iter().map(|l| l.to_string()).collect();
    let aggregation = match p.gte.level_aggregation {
        LevelAggregation::Mean => "mean",
        LevelAggregation::Max => "max",
    };
    let _ = writeln!(out, "feature = {kind}");
    let _ = writeln!(out, "fluorescence = {}", input.display());
    let _ = writeln!(out, "neurons = {}", m.n());
    let _ = writeln!(out, "frames = {frames}");
    let _ = writeln!(out, "symmetric = {}", m.is_symmetric());
    let _ = writeln!(out, "alpha_pct = {}", p.features.alpha_pct);
    let _ = writeln!(out, "range_k = {}", p.features.range_k);
    let _ = writeln!(out, "markov_order = {}", p.gte.markov_order);
    let _ = writeln!(out, "bins = {}", p.gte.bins);
    let _ = writeln!(out, "conditioning_levels = {}", levels.join(", "));
    let _ = writeln!(out, "level_aggregation = {aggregation}");
    let _ = writeln!(out, "instant_feedback = {}", p.gte.instant_feedback);
    let _ = writeln!(out, "use_difference_signal = {}", p.gte.use_difference_signal);
    out
}

fn run(cli: Cli) -> Result<()> {
    let workers = cli.workers.unwrap_or(0);
    match cli.command {
        Command::Simulate { settings, out, seed, neurons, frames, chains } => {
            let mut cfg = SynthConfig::default();
            let flags = vec![
                ("seed", some_string(&seed)),
                ("neuron_count", some_string(&neurons)),
                ("frame_count", some_string(&frames)),
            ];
            apply_all(&mut cfg, &collect_settings(&settings, flags)?)?;
            let (truth, rec) = match chains {
                Some(c) => {
                    cfg.neuron_count = 3 * c;
                    let truth = disjoint_chains(c);
                    let rec = generate_with_network(&cfg, &truth)?;
                    (truth, rec)
                }
                None => generate(&cfg)?,
            };
            let fluorescence = io::render_fluorescence(&rec);
            let network = io::render_network(&truth);
            let positions = io::render_positions(rec.positions().unwrap_or_default());
            write_file(&out.join("fluorescence.txt"), &fluorescence)?;
            write_file(&out.join("network.txt"), &network)?;
            write_file(&out.join("positions.txt"), &positions)?;
        }
        Command::Feature {
            name,
            settings,
            fluorescence,
            out,
            alpha_pct,
            range_k,
            markov_order,
            bins,
            conditioning_levels,
        } => {
            let kind: FeatureKind = name.parse()?;
            let mut params = FeatureParams::default();
            let flags = vec![
                ("alpha_pct", some_string(&alpha_pct)),
                ("range_k", some_string(&range_k)),
                ("markov_order", some_string(&markov_order)),
                ("bins", some_string(&bins)),
                ("conditioning_levels", conditioning_levels),
            ];
            apply_all(&mut params, &collect_settings(&settings, flags)?)?;
            params.features.validate()?;
            params.gte.validate()?;
            let rec = io::read_fluorescence(&fluorescence)?;
            let m = with_workers(workers, || compute_feature(kind, &rec, &params.features, &params.gte))??;
            let meta = metadata(kind, &fluorescence, &m, rec.frame_count(), &params);
            write_file(&out, &io::render_matrix(&m))?;
            let mut sidecar = out.into_os_string();
            sidecar.push(".meta");
            write_file(Path::new(&sidecar), &meta)?;
        }
        Command::Ensemble { method, out, inputs } => {
            let members = inputs.iter().map(io::read_matrix).collect::<clrnet::Result<Vec<_>>>()?;
            let m = with_workers(workers, || match method {
                EnsembleMethod::Clrsum => clr_sum(&members),
                EnsembleMethod::Ranksum => rank_sum(&members),
            })??;
            write_file(&out, &io::render_matrix(&m))?;
        }
        Command::Score {
            matrix,
            truth,
            dataset,
            directed,
            include_inhibitory,
            out,
            contributions,
        } => {
            let m = io::read_matrix(&matrix)?;
            let net = io::read_network(&truth, m.n())?;
            let labels = make_labels(&net, !directed, include_inhibitory);
            let report = evaluate(&m, &labels, &dataset)?;
            let text = render_reports(std::slice::from_ref(&report));
            if let Some(path) = contributions {
                write_file(&path, &render_contributions(&report))?;
            }
            match out {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::ExportChallenge { matrix, net_id, out } => {
            if net_id.is_empty() || net_id.contains([',', '\n']) {
                bail!("net id {net_id:?} must be non-empty without commas or newlines");
            }
            let m = io::read_matrix(&matrix)?;
            write_file(&out, &io::render_challenge(&m, &net_id))?;
        }
        Command::Pipeline {
            settings,
            fluorescence,
            network,
            positions,
            out_dir,
            dataset,
            members,
            baselines,
        } => {
            let mut cfg = PipelineConfig::default();
            let flags = vec![
                ("fluorescence", some_string(&fluorescence.map(|p| p.display().to_string()))),
                ("network", some_string(&network.map(|p| p.display().to_string()))),
                ("positions", some_string(&positions.map(|p| p.display().to_string()))),
                ("output_dir", some_string(&out_dir.map(|p| p.display().to_string()))),
                ("dataset", dataset),
                ("members", members),
                ("baselines", baselines),
                ("workers", some_string(&cli.workers)),
            ];
            apply_all(&mut cfg, &collect_settings(&settings, flags)?)?;
            if cfg.fluorescence.as_os_str().is_empty() {
                bail!("no fluorescence file given (use --fluorescence or `fluorescence = ...`)");
            }
            let output = pipeline::run(&cfg)?;
            if !output.reports.is_empty() {
                print!("{}", render_reports(&output.reports));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{} (see --help)", first.trim());
            return ExitCode::from(2);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // one line, causes joined
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
