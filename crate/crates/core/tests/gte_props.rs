mod common;

use std::collections::HashMap;

use clrnet::gte::{gte_network, symmetrize_min, transfer_entropy, GteConfig};
use clrnet::{FluorescenceRecording, ScoreMatrix};
use common::rng;
use proptest::prelude::*;
use rand::Rng;

/// Plug-in TE from explicit joint counts over (future, dst history, src history).
fn naive_te(src: &[u32], dst: &[u32], mask: &[bool], k: usize, instant: bool) -> f64 {
    let mut joint: HashMap<(u32, Vec<u32>, Vec<u32>), f64> = HashMap::new();
    for u in k..dst.len() {
        if !(u - k..=u).all(|t| mask[t]) {
            continue;
        }
        let hd = dst[u - k..u].to_vec();
        // the same-frame source symbol extends the k-history
        let hs = if instant { src[u - k..=u].to_vec() } else { src[u - k..u].to_vec() };
        *joint.entry((dst[u], hd, hs)).or_default() += 1.0;
    }
    let total: f64 = joint.values().sum();
    let mut yz: HashMap<(Vec<u32>, Vec<u32>), f64> = HashMap::new();
    let mut xy: HashMap<(u32, Vec<u32>), f64> = HashMap::new();
    let mut y: HashMap<Vec<u32>, f64> = HashMap::new();
    for ((x, hd, hs), c) in &joint {
        *yz.entry((hd.clone(), hs.clone())).or_default() += c;
        *xy.entry((*x, hd.clone())).or_default() += c;
        *y.entry(hd.clone()).or_default() += c;
    }
    let mut te = 0.0;
    for ((x, hd, hs), c) in &joint {
        let ratio = (c * y[hd]) / (yz[&(hd.clone(), hs.clone())] * xy[&(*x, hd.clone())]);
        te += c / total * ratio.log2();
    }
    te.max(0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transfer_entropy_matches_count_oracle(
        seed in any::<u64>(),
        k in 1usize..=3,
        bins in 2usize..=4,
        instant in any::<bool>(),
        drop in 0.0f64..0.3,
    ) {
        let mut r = rng(seed);
        let n = 600;
        let src: Vec<u32> = (0..n).map(|_| r.random_range(0..bins as u32)).collect();
        let dst: Vec<u32> = (0..n).map(|t| if t > 0 && r.random_bool(0.6) { src[t - 1] } else { r.random_range(0..bins as u32) }).collect();
        let mask: Vec<bool> = (0..n).map(|_| !r.random_bool(drop)).collect();
        let cfg = GteConfig { markov_order: k, bins, instant_feedback: instant, ..GteConfig::default() };
        let got = transfer_entropy(&src, &dst, &mask, &cfg).unwrap();
        prop_assert!(got >= 0.0);
        prop_assert!((got - naive_te(&src, &dst, &mask, k, instant)).abs() < 1e-12);
    }

    #[test]
    fn symmetrize_min_is_a_symmetric_lower_envelope(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 10;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { r.random::<f64>() }).collect()).collect();
        let m = ScoreMatrix::from_rows(&rows, "d").unwrap();
        let s = symmetrize_min(&m);
        prop_assert!(s.is_symmetric());
        for i in 0..n {
            for j in 0..n {
                prop_assert!(s.get(i, j) <= m.get(i, j) && s.get(i, j) <= m.get(j, i));
            }
        }
        let again = symmetrize_min(&s);
        prop_assert_eq!(again.values(), s.values());
    }
}

fn copy_chain_recording(frames: usize, seed: u64) -> FluorescenceRecording {
    let mut r = rng(seed);
    let lead: Vec<f64> = (0..frames).map(|_| r.random::<f64>()).collect();
    let lag: Vec<f64> = (0..frames).map(|t| if t == 0 { 0.5 } else { lead[t - 1] }).collect();
    FluorescenceRecording::from_traces(vec![lead, lag]).unwrap()
}

#[test]
fn time_reversal_swaps_the_dominant_direction() {
    let rec = copy_chain_recording(5000, 3);
    let cfg = GteConfig::default();
    let forward = gte_network(&rec, &cfg).unwrap();
    assert!(forward.get(0, 1) > 10.0 * forward.get(1, 0), "{} vs {}", forward.get(0, 1), forward.get(1, 0));
    let backward = gte_network(&rec.time_reversed(), &cfg).unwrap();
    assert!(backward.get(1, 0) > 10.0 * backward.get(0, 1), "{} vs {}", backward.get(1, 0), backward.get(0, 1));
}

#[test]
fn independent_noise_network_is_near_zero() {
    let mut r = rng(17);
    let traces: Vec<Vec<f64>> = (0..6).map(|_| (0..10_000).map(|_| r.random::<f64>()).collect()).collect();
    let rec = FluorescenceRecording::from_traces(traces).unwrap();
    // a small alphabet keeps the plug-in bias well under the bound
    let cfg = GteConfig { markov_order: 1, bins: 2, use_difference_signal: false, ..GteConfig::default() };
    let m = gte_network(&rec, &cfg).unwrap();
    assert!(m.values().iter().all(|&v| (0.0..=0.01).contains(&v)), "{:?}", m.values());
}

#[test]
fn conditioning_levels_are_averaged() {
    let mut r = rng(5);
    let traces: Vec<Vec<f64>> = (0..3).map(|_| (0..3000).map(|_| r.random::<f64>()).collect()).collect();
    let rec = FluorescenceRecording::from_traces(traces).unwrap();
    let one = |level: f64| gte_network(&rec, &GteConfig { conditioning_levels: vec![level], ..GteConfig::default() }).unwrap();
    let (a, b) = (one(0.5), one(0.6));
    let both = gte_network(&rec, &GteConfig { conditioning_levels: vec![0.5, 0.6], ..GteConfig::default() }).unwrap();
    for ((x, y), z) in a.values().iter().zip(b.values()).zip(both.values()) {
        assert!(((x + y) / 2.0 - z).abs() < 1e-15);
    }
}
