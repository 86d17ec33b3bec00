//! Reconstruction of neural connectivity from calcium fluorescence recordings.
//!
//! Four pairwise feature networks (min-symmetrized generalized transfer
//! entropy, extreme-frame correlation, masked mean squared difference and
//! robust difference range) are each normalized with CLR and summed. The
//! crate also ships the evaluation metrics used to compare reconstructions
//! (ROC AUC, AUPR, paired Wilcoxon test) and a seeded generator of
//! synthetic datasets.

pub mod config;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod gte;
pub mod io;
pub mod pipeline;
pub mod stats;
pub mod synth;

pub use data::{Edge, FluorescenceRecording, GroundTruthNetwork, ScoreMatrix};
pub use error::{Error, Result};
pub use features::FeatureConfig;
pub use gte::GteConfig;
pub use synth::SynthConfig;
