//! `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Every config type accepts its
//! own keys through [`ApplyKey`]; unknown keys are an error so typos surface.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::gte::{GteConfig, LevelAggregation};
use crate::synth::SynthConfig;

/// Parses `key = value` lines, returning `(line, key, value)`.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: "<config>".into(),
            line: k + 1,
            message: format!("expected `key = value`, got {line:?}"),
        })?;
        out.push((k + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn read_key_values(path: &Path) -> Result<Vec<(usize, String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key_values(&text).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    })
}

pub(crate) fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidInput(format!("invalid value {value:?} for `{key}`")))
}

pub(crate) fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::InvalidInput(format!("invalid boolean {value:?} for `{key}`"))),
    }
}

/// A level list like `0.05, 0.10`; `none` or `inf` disables conditioning.
pub fn parse_levels(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s {
            "none" | "inf" | "disabled" => Ok(f64::INFINITY),
            s => parse_value("conditioning_levels", s),
        })
        .collect()
}

/// Accepts configuration keys one at a time.
pub trait ApplyKey {
    /// Returns `Ok(false)` when the key is not one of this type's.
    fn apply_key(&mut self, key: &str, value: &str) -> Result<bool>;
}

impl ApplyKey for FeatureConfig {
    fn apply_key(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "alpha_pct" => self.alpha_pct = parse_value(key, value)?,
            "range_k" => self.range_k = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

impl ApplyKey for GteConfig {
    fn apply_key(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "markov_order" => self.markov_order = parse_value(key, value)?,
            "bins" => self.bins = parse_value(key, value)?,
            "conditioning_levels" | "conditioning_level" => self.conditioning_levels = parse_levels(value)?,
            "level_aggregation" => {
                self.level_aggregation = match value {
                    "mean" => LevelAggregation::Mean,
                    "max" => LevelAggregation::Max,
                    _ => return Err(Error::InvalidInput(format!("level_aggregation must be mean or max, got {value:?}"))),
                }
            }
            "instant_feedback" => self.instant_feedback = parse_bool(key, value)?,
            "use_difference_signal" => self.use_difference_signal = parse_bool(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

impl ApplyKey for SynthConfig {
    fn apply_key(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "neuron_count" => self.neuron_count = parse_value(key, value)?,
            "frame_count" => self.frame_count = parse_value(key, value)?,
            "connection_prob" => self.connection_prob = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "spike_rate" => self.spike_rate = parse_value(key, value)?,
            "coupling" => self.coupling = parse_value(key, value)?,
            "calcium_decay" => self.calcium_decay = parse_value(key, value)?,
            "noise_std" => self.noise_std = parse_value(key, value)?,
            "scatter_radius" => self.scatter_radius = parse_value(key, value)?,
            "scatter_weight" => self.scatter_weight = parse_value(key, value)?,
            "saturation" => self.saturation = parse_value(key, value)?,
            "burst_rate" => self.burst_rate = parse_value(key, value)?,
            "burst_participation" => self.burst_participation = parse_value(key, value)?,
            "participation_spread" => self.participation_spread = parse_value(key, value)?,
            "substeps" => self.substeps = parse_value(key, value)?,
            "gain_spread" => self.gain_spread = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Applies every pair to `target`, rejecting unknown keys.
pub fn apply_all<C: ApplyKey>(target: &mut C, pairs: &[(usize, String, String)]) -> Result<()> {
    for (line, key, value) in pairs {
        if !target.apply_key(key, value)? {
            return Err(Error::InvalidInput(format!("unknown key `{key}` on line {line}")));
        }
    }
    Ok(())
}
