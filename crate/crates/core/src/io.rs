//! Plain CSV formats used for datasets and intermediate networks.
//!
//! * fluorescence: one line per frame, N comma-separated values, no header
//! * network: `i,j,w` lines with 1-based neuron indices and `w` in {-1, 1}
//! * positions: one `x,y` line per neuron
//! * score matrix: N lines of N values
//! * challenge submission: `NET_neuronI_neuronJ,Strength` header, then one
//!   `<net>_<i>_<j>,<score>` row per ordered pair (1-based)
//!
//! Reals are written with 17 significant digits so they parse back exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::{Edge, FluorescenceRecording, GroundTruthNetwork, ScoreMatrix};
use crate::error::{Error, Result};

/// Formats a real with 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads every record of a headerless CSV as reals, with 1-based line numbers.
fn read_real_rows(path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let values = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| parse_err(path, line, format!("not a number: {field:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn join_reals(out: &mut String, values: &[f64]) {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&format_real(*v));
    }
    out.push('\n');
}

pub fn read_fluorescence(path: impl AsRef<Path>) -> Result<FluorescenceRecording> {
    let path = path.as_ref();
    let rows: Vec<Vec<f64>> = read_real_rows(path)?.into_iter().map(|(_, r)| r).collect();
    FluorescenceRecording::from_frames(&rows).map_err(|e| match e {
        Error::InvalidInput(msg) => parse_err(path, 0, msg),
        other => other,
    })
}

pub fn render_fluorescence(rec: &FluorescenceRecording) -> String {
    let mut out = String::new();
    let mut frame = vec![0.0; rec.neuron_count()];
    for t in 0..rec.frame_count() {
        for (i, v) in frame.iter_mut().enumerate() {
            *v = rec.sample(t, i);
        }
        join_reals(&mut out, &frame);
    }
    out
}

pub fn write_fluorescence(path: impl AsRef<Path>, rec: &FluorescenceRecording) -> Result<()> {
    write_text(path.as_ref(), &render_fluorescence(rec))
}

pub fn read_positions(path: impl AsRef<Path>) -> Result<Vec<[f64; 2]>> {
    let path = path.as_ref();
    read_real_rows(path)?
        .into_iter()
        .map(|(line, row)| match row.as_slice() {
            [x, y] => Ok([*x, *y]),
            _ => Err(parse_err(path, line, "expected `x,y`")),
        })
        .collect()
}

pub fn render_positions(positions: &[[f64; 2]]) -> String {
    let mut out = String::new();
    for p in positions {
        join_reals(&mut out, p);
    }
    out
}

pub fn write_positions(path: impl AsRef<Path>, positions: &[[f64; 2]]) -> Result<()> {
    write_text(path.as_ref(), &render_positions(positions))
}

/// Reads a ground-truth edge list for a network of `neuron_count` neurons.
pub fn read_network(path: impl AsRef<Path>, neuron_count: usize) -> Result<GroundTruthNetwork> {
    let path = path.as_ref();
    let mut edges = Vec::new();
    for (line, row) in read_real_rows(path)? {
        let [i, j, w] = row.as_slice() else {
            return Err(parse_err(path, line, "expected `i,j,w`"));
        };
        let index = |v: f64| -> Result<usize> {
            if v.fract() != 0.0 || v < 1.0 || v > neuron_count as f64 {
                return Err(parse_err(
                    path,
                    line,
                    format!("neuron index {v} outside 1..={neuron_count}"),
                ));
            }
            Ok(v as usize - 1)
        };
        let weight = match *w {
            w if w == 1.0 => 1,
            w if w == -1.0 => -1,
            other => return Err(parse_err(path, line, format!("weight {other} not in {{-1, 1}}"))),
        };
        edges.push(Edge {
            source: index(*i)?,
            target: index(*j)?,
            weight,
        });
    }
    GroundTruthNetwork::new(neuron_count, edges).map_err(|e| match e {
        Error::InvalidInput(msg) => parse_err(path, 0, msg),
        other => other,
    })
}

pub fn render_network(net: &GroundTruthNetwork) -> String {
    let mut out = String::new();
    for e in net.edges() {
        writeln!(out, "{},{},{}", e.source + 1, e.target + 1, e.weight).unwrap();
    }
    out
}

pub fn write_network(path: impl AsRef<Path>, net: &GroundTruthNetwork) -> Result<()> {
    write_text(path.as_ref(), &render_network(net))
}

/// Reads a dense matrix; the name is taken from the file stem.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<ScoreMatrix> {
    let path = path.as_ref();
    let rows: Vec<Vec<f64>> = read_real_rows(path)?.into_iter().map(|(_, r)| r).collect();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if rows.len() < 2 {
        return Err(parse_err(path, 0, "a score matrix needs at least 2 rows"));
    }
    ScoreMatrix::from_rows(&rows, name).map_err(|e| match e {
        Error::InvalidInput(msg) => parse_err(path, 0, msg),
        other => other,
    })
}

pub fn render_matrix(m: &ScoreMatrix) -> String {
    let mut out = String::with_capacity(m.n() * m.n() * 24);
    for i in 0..m.n() {
        join_reals(&mut out, m.row(i));
    }
    out
}

pub fn write_matrix(path: impl AsRef<Path>, m: &ScoreMatrix) -> Result<()> {
    write_text(path.as_ref(), &render_matrix(m))
}

pub const CHALLENGE_HEADER: &str = "NET_neuronI_neuronJ,Strength";

/// Renders every ordered off-diagonal pair as a challenge submission row.
pub fn render_challenge(m: &ScoreMatrix, net_id: &str) -> String {
    let mut out = String::with_capacity(m.n() * m.n() * 40);
    out.push_str(CHALLENGE_HEADER);
    out.push('\n');
    for i in 0..m.n() {
        for j in 0..m.n() {
            if i != j {
                writeln!(out, "{net_id}_{}_{},{}", i + 1, j + 1, format_real(m.get(i, j))).unwrap();
            }
        }
    }
    out
}

/// Parses a submission back into a directed matrix of size `n`.
pub fn parse_challenge(text: &str, n: usize) -> Result<ScoreMatrix> {
    let path = Path::new("<challenge>");
    let mut values = vec![0.0; n * n];
    for (k, line) in text.lines().enumerate() {
        if k == 0 && line == CHALLENGE_HEADER || line.trim().is_empty() {
            continue;
        }
        let (key, score) = line
            .split_once(',')
            .ok_or_else(|| parse_err(path, k + 1, "expected `key,score`"))?;
        let mut parts = key.rsplitn(3, '_');
        let (Some(j), Some(i), Some(_net)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(path, k + 1, format!("malformed key {key:?}")));
        };
        let idx = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
                _ => Err(parse_err(path, k + 1, format!("bad neuron index {s:?}"))),
            }
        };
        let (i, j) = (idx(i)?, idx(j)?);
        if i == j {
            return Err(parse_err(path, k + 1, "self pair in submission"));
        }
        values[i * n + j] = score
            .trim()
            .parse()
            .map_err(|_| parse_err(path, k + 1, format!("not a number: {score:?}")))?;
    }
    ScoreMatrix::new(values, n, false, "challenge")
}
