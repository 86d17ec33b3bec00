//! Core containers: recordings, score networks and ground truth.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A T×N fluorescence recording, stored neuron-major so each neuron's trace
/// is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FluorescenceRecording {
    traces: Vec<f64>,
    neuron_count: usize,
    frame_count: usize,
    positions: Option<Vec<[f64; 2]>>,
}

impl FluorescenceRecording {
    /// Builds a recording from one trace per neuron.
    pub fn from_traces(traces: Vec<Vec<f64>>) -> Result<Self> {
        let neuron_count = traces.len();
        let frame_count = traces.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(neuron_count * frame_count);
        for (i, trace) in traces.into_iter().enumerate() {
            if trace.len() != frame_count {
                return Err(Error::InvalidInput(format!(
                    "neuron {i} has {} frames, expected {frame_count}",
                    trace.len()
                )));
            }
            flat.extend(trace);
        }
        Self::from_neuron_major(flat, neuron_count, frame_count)
    }

    /// Builds a recording from frame rows (`rows[t][i]`), the on-disk layout.
    pub fn from_frames(rows: &[Vec<f64>]) -> Result<Self> {
        let frame_count = rows.len();
        let neuron_count = rows.first().map_or(0, Vec::len);
        let mut flat = vec![0.0; neuron_count * frame_count];
        for (t, row) in rows.iter().enumerate() {
            if row.len() != neuron_count {
                return Err(Error::InvalidInput(format!(
                    "frame {t} has {} values, expected {neuron_count}",
                    row.len()
                )));
            }
            for (i, &v) in row.iter().enumerate() {
                flat[i * frame_count + t] = v;
            }
        }
        Self::from_neuron_major(flat, neuron_count, frame_count)
    }

    fn from_neuron_major(traces: Vec<f64>, neuron_count: usize, frame_count: usize) -> Result<Self> {
        if neuron_count < 2 || frame_count < 2 {
            return Err(Error::InvalidInput(format!(
                "recording needs at least 2 neurons and 2 frames, got {neuron_count}x{frame_count}"
            )));
        }
        if let Some(pos) = traces.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample for neuron {} at frame {}",
                pos / frame_count,
                pos % frame_count
            )));
        }
        Ok(FluorescenceRecording {
            traces,
            neuron_count,
            frame_count,
            positions: None,
        })
    }

    pub fn with_positions(mut self, positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.len() != self.neuron_count {
            return Err(Error::DimensionMismatch {
                expected: self.neuron_count,
                found: positions.len(),
            });
        }
        if positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite neuron position".into()));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn neuron_count(&self) -> usize {
        self.neuron_count
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    /// The full time series of neuron `i`.
    pub fn trace(&self, i: usize) -> &[f64] {
        &self.traces[i * self.frame_count..(i + 1) * self.frame_count]
    }

    pub fn traces(&self) -> impl Iterator<Item = &[f64]> {
        self.traces.chunks_exact(self.frame_count)
    }

    pub fn sample(&self, frame: usize, neuron: usize) -> f64 {
        self.traces[neuron * self.frame_count + frame]
    }

    /// Mean over neurons for every frame.
    pub fn population_average(&self) -> Vec<f64> {
        let mut avg = vec![0.0; self.frame_count];
        for trace in self.traces() {
            for (a, v) in avg.iter_mut().zip(trace) {
                *a += v;
            }
        }
        let n = self.neuron_count as f64;
        avg.iter_mut().for_each(|a| *a /= n);
        avg
    }

    /// The same recording with frame order reversed.
    pub fn time_reversed(&self) -> Self {
        let traces = self
            .traces()
            .flat_map(|t| t.iter().rev().copied())
            .collect();
        FluorescenceRecording {
            traces,
            neuron_count: self.neuron_count,
            frame_count: self.frame_count,
            positions: self.positions.clone(),
        }
    }
}

/// A dense N×N network of pairwise scores. Higher always means a stronger link.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    values: Vec<f64>,
    n: usize,
    symmetric: bool,
    name: String,
}

impl ScoreMatrix {
    /// Validates the diagonal, finiteness and (when `symmetric`) exact symmetry.
    pub fn new(values: Vec<f64>, n: usize, symmetric: bool, name: impl Into<String>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        let m = ScoreMatrix {
            values,
            n,
            symmetric,
            name: name.into(),
        };
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(Error::InvalidInput(format!("diagonal entry {i} is not zero")));
            }
        }
        if m.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("score matrix has non-finite entries".into()));
        }
        if symmetric {
            m.check_symmetric()?;
        }
        Ok(m)
    }

    /// Builds from rows, inferring the symmetric flag from the values.
    pub fn from_rows(rows: &[Vec<f64>], name: impl Into<String>) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        let mut m = ScoreMatrix::new(values, n, false, name)?;
        m.symmetric = m.check_symmetric().is_ok();
        Ok(m)
    }

    pub(crate) fn from_parts_unchecked(values: Vec<f64>, n: usize, symmetric: bool, name: &str) -> Self {
        debug_assert_eq!(values.len(), n * n);
        ScoreMatrix {
            values,
            n,
            symmetric,
            name: name.to_string(),
        }
    }

    /// Fills a symmetric matrix from upper-triangle rows: `upper[i][k]` is the
    /// entry `(i, i + 1 + k)`.
    pub(crate) fn from_upper_rows(n: usize, upper: Vec<Vec<f64>>, name: &str) -> Self {
        let mut values = vec![0.0; n * n];
        for (i, row) in upper.into_iter().enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                let j = i + 1 + k;
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::from_parts_unchecked(values, n, true, name)
    }

    pub fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.get(i, j) != self.get(j, i) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Off-diagonal upper-triangle entries in row-major order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            out.extend_from_slice(&self.row(i)[i + 1..]);
        }
        out
    }
}

/// A directed synaptic connection. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    /// +1 excitatory, -1 inhibitory.
    pub weight: i8,
}

/// Known connectivity, used only to score reconstructions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthNetwork {
    neuron_count: usize,
    edges: BTreeSet<Edge>,
}

impl GroundTruthNetwork {
    pub fn new(neuron_count: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for e in edges {
            if e.source == e.target {
                return Err(Error::InvalidInput(format!("self-loop on neuron {}", e.source)));
            }
            if e.source >= neuron_count || e.target >= neuron_count {
                return Err(Error::InvalidInput(format!(
                    "edge {}->{} outside 0..{neuron_count}",
                    e.source, e.target
                )));
            }
            if e.weight != 1 && e.weight != -1 {
                return Err(Error::InvalidInput(format!("edge weight {} not in {{-1, 1}}", e.weight)));
            }
            set.insert(e);
        }
        Ok(GroundTruthNetwork {
            neuron_count,
            edges: set,
        })
    }

    pub fn neuron_count(&self) -> usize {
        self.neuron_count
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Presynaptic sources of every neuron.
    pub fn presynaptic(&self) -> Vec<Vec<usize>> {
        let mut pre = vec![Vec::new(); self.neuron_count];
        for e in &self.edges {
            pre[e.target].push(e.source);
        }
        pre
    }
}
