//! Seeded synthetic calcium-imaging datasets.
//!
//! A probabilistic branching process stands in for a biophysical simulator:
//! neurons fire spontaneously, relay presynaptic spikes one propagation step
//! later with probability `coupling`, and optionally join network-wide
//! bursts. A frame spans `substeps` propagation steps. Spikes
//! drive a leaky calcium trace which is read out through a saturating
//! fluorescence curve, optionally blurred by light scattering between
//! nearby neurons, scaled by a per-neuron optical gain, plus Gaussian
//! camera noise.
//!
//! All randomness comes from one ChaCha stream seeded by `seed`, consumed
//! in a fixed order, so a config always yields the same dataset.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Edge, FluorescenceRecording, GroundTruthNetwork};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub neuron_count: usize,
    pub frame_count: usize,
    /// Probability of each directed edge in the random graph.
    pub connection_prob: f64,
    pub seed: u64,
    /// Per-frame spontaneous firing probability.
    pub spike_rate: f64,
    /// Probability that a presynaptic spike triggers a spike one step later.
    pub coupling: f64,
    /// Calcium decay factor per frame, in (0, 1).
    pub calcium_decay: f64,
    pub noise_std: f64,
    /// Neighborhood radius for light scattering; 0 disables it.
    pub scatter_radius: f64,
    /// Share of a neuron's signal replaced by its neighbors' mean.
    pub scatter_weight: f64,
    /// Half-saturation constant K of `C / (C + K)`.
    pub saturation: f64,
    /// Per-frame probability of a network-wide burst.
    pub burst_rate: f64,
    /// Mean probability that a neuron fires during a burst frame.
    pub burst_participation: f64,
    /// Relative spread of per-neuron burst participation: neuron `k` joins
    /// bursts with probability `burst_participation * (1 + spread * u_k)`,
    /// `u_k` uniform in [-1, 1], clamped to [0, 1].
    pub participation_spread: f64,
    /// Spike-propagation steps per imaging frame. With more than one step a
    /// relayed spike can land in the same frame as its cause.
    pub substeps: usize,
    /// Relative spread of per-neuron optical gain (dye loading): the clean
    /// fluorescence of neuron `k` is scaled by `1 + spread * u_k`, `u_k`
    /// uniform in [-1, 1], before noise is added.
    pub gain_spread: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            neuron_count: 100,
            frame_count: 10_000,
            connection_prob: 0.05,
            seed: 42,
            spike_rate: 0.01,
            coupling: 0.3,
            calcium_decay: 0.9,
            noise_std: 0.03,
            scatter_radius: 0.0,
            scatter_weight: 0.1,
            saturation: 1.0,
            burst_rate: 0.0,
            burst_participation: 0.5,
            participation_spread: 0.0,
            substeps: 1,
            gain_spread: 0.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if self.neuron_count < 2 {
            return fail(format!("neuron_count must be at least 2, got {}", self.neuron_count));
        }
        if self.frame_count < 2 {
            return fail(format!("frame_count must be at least 2, got {}", self.frame_count));
        }
        for (name, p) in [
            ("connection_prob", self.connection_prob),
            ("spike_rate", self.spike_rate),
            ("coupling", self.coupling),
            ("scatter_weight", self.scatter_weight),
            ("burst_rate", self.burst_rate),
            ("burst_participation", self.burst_participation),
            ("participation_spread", self.participation_spread),
            ("gain_spread", self.gain_spread),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.calcium_decay > 0.0 && self.calcium_decay < 1.0) {
            return fail(format!("calcium_decay must lie in (0, 1), got {}", self.calcium_decay));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return fail(format!("noise_std must be finite and >= 0, got {}", self.noise_std));
        }
        if !(self.scatter_radius >= 0.0 && self.scatter_radius.is_finite()) {
            return fail(format!("scatter_radius must be finite and >= 0, got {}", self.scatter_radius));
        }
        if self.substeps == 0 {
            return fail("substeps must be at least 1".into());
        }
        if !(self.saturation > 0.0 && self.saturation.is_finite()) {
            return fail(format!("saturation must be finite and > 0, got {}", self.saturation));
        }
        Ok(())
    }
}

/// `count` disjoint chains `3c -> 3c+1 -> 3c+2`, all excitatory.
pub fn disjoint_chains(count: usize) -> GroundTruthNetwork {
    let edges = (0..count).flat_map(|c| {
        let a = 3 * c;
        [
            Edge { source: a, target: a + 1, weight: 1 },
            Edge { source: a + 1, target: a + 2, weight: 1 },
        ]
    });
    GroundTruthNetwork::new(3 * count, edges).expect("chain edges are valid")
}

/// Random directed graph plus a recording driven by it.
pub fn generate(cfg: &SynthConfig) -> Result<(GroundTruthNetwork, FluorescenceRecording)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.neuron_count;
    let mut edges = Vec::new();
    for source in 0..n {
        for target in 0..n {
            if source != target && rng.random_bool(cfg.connection_prob) {
                edges.push(Edge { source, target, weight: 1 });
            }
        }
    }
    let truth = GroundTruthNetwork::new(n, edges)?;
    let rec = simulate(cfg, &truth, &mut rng)?;
    Ok((truth, rec))
}

/// Recording driven by a given network; `connection_prob` is ignored and
/// `neuron_count` must match.
pub fn generate_with_network(cfg: &SynthConfig, truth: &GroundTruthNetwork) -> Result<FluorescenceRecording> {
    cfg.validate()?;
    if truth.neuron_count() != cfg.neuron_count {
        return Err(Error::DimensionMismatch {
            expected: cfg.neuron_count,
            found: truth.neuron_count(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    simulate(cfg, truth, &mut rng)
}

fn simulate(cfg: &SynthConfig, truth: &GroundTruthNetwork, rng: &mut ChaCha8Rng) -> Result<FluorescenceRecording> {
    let n = cfg.neuron_count;
    let frames = cfg.frame_count;
    let presynaptic = truth.presynaptic();
    let positions: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let neighbors = scatter_neighbors(&positions, cfg.scatter_radius);

    let participation: Vec<f64> = (0..n)
        .map(|_| {
            let u = 2.0 * rng.random::<f64>() - 1.0;
            (cfg.burst_participation * (1.0 + cfg.participation_spread * u)).clamp(0.0, 1.0)
        })
        .collect();
    let gain: Vec<f64> = (0..n)
        .map(|_| 1.0 + cfg.gain_spread * (2.0 * rng.random::<f64>() - 1.0))
        .collect();

    // spontaneous firing is spread over the substeps of a frame
    let step_rate = cfg.spike_rate / cfg.substeps as f64;
    let mut calcium = vec![0.0f64; n];
    let mut fired = vec![false; n];
    let mut next = vec![false; n];
    let mut frame_spikes = vec![0u32; n];
    let mut clean = vec![vec![0.0f64; frames]; n];
    for t in 0..frames {
        for i in 0..n {
            let c = calcium[i];
            clean[i][t] = c / (c + cfg.saturation);
        }
        let burst = rng.random::<f64>() < cfg.burst_rate;
        frame_spikes.iter_mut().for_each(|s| *s = 0);
        for step in 0..cfg.substeps {
            for i in 0..n {
                let mut spike = rng.random::<f64>() < step_rate;
                for &p in &presynaptic[i] {
                    if fired[p] && rng.random::<f64>() < cfg.coupling {
                        spike = true;
                    }
                }
                if burst && step == 0 && rng.random::<f64>() < participation[i] {
                    spike = true;
                }
                next[i] = spike;
            }
            std::mem::swap(&mut fired, &mut next);
            for (count, &f) in frame_spikes.iter_mut().zip(&fired) {
                *count += u32::from(f);
            }
        }
        for i in 0..n {
            calcium[i] = cfg.calcium_decay * calcium[i] + f64::from(frame_spikes[i]);
        }
    }

    let mixed: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            if neighbors[i].is_empty() {
                return clean[i].clone();
            }
            let w = cfg.scatter_weight;
            let k = neighbors[i].len() as f64;
            (0..frames)
                .map(|t| {
                    let around: f64 = neighbors[i].iter().map(|&j| clean[j][t]).sum::<f64>() / k;
                    (1.0 - w) * clean[i][t] + w * around
                })
                .collect()
        })
        .collect();
    let mixed: Vec<Vec<f64>> = mixed
        .into_iter()
        .zip(&gain)
        .map(|(trace, &g)| trace.into_iter().map(|v| g * v).collect())
        .collect();

    let noise = Normal::new(0.0, cfg.noise_std).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut traces = mixed;
    for t in 0..frames {
        for trace in traces.iter_mut() {
            trace[t] += noise.sample(rng);
        }
    }
    FluorescenceRecording::from_traces(traces)?.with_positions(positions)
}

fn scatter_neighbors(positions: &[[f64; 2]], radius: f64) -> Vec<Vec<usize>> {
    let n = positions.len();
    let mut out = vec![Vec::new(); n];
    if radius <= 0.0 {
        return out;
    }
    for i in 0..n {
        for j in 0..n {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            if i != j && (dx * dx + dy * dy).sqrt() < radius {
                out[i].push(j);
            }
        }
    }
    out
}
