mod common;

use clrnet::ensemble::{clr, clr_sum, rank_sum};
use clrnet::evaluation::{auc_contributions, aupr, aupr_contributions, roc_auc, wilcoxon_signed_rank, LabeledScores};
use clrnet::features::{corr_network, ct_network, md_network, rd_network, FeatureConfig};
use clrnet::stats::upper_quantile;
use clrnet::{FluorescenceRecording, ScoreMatrix};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn assert_symmetric_zero_diagonal(m: &ScoreMatrix) {
    for i in 0..m.n() {
        assert_eq!(m.get(i, i), 0.0);
        for j in 0..m.n() {
            assert_eq!(m.get(i, j).to_bits(), m.get(j, i).to_bits(), "{} at ({i},{j})", m.name());
        }
    }
}

#[test]
fn features_match_double_loop_oracles() {
    for seed in 0..3 {
        let rec = random_recording(10, 500, seed);
        let corr = corr_network(&rec);
        assert!(max_abs_diff(&corr, &naive_corr(&rec)) < 1e-10);
        for alpha_pct in [0.1, 2.0, 10.0] {
            let cfg = FeatureConfig { alpha_pct, range_k: 10 };
            let ct = ct_network(&rec, &cfg).unwrap();
            let md = md_network(&rec, &cfg).unwrap();
            assert!(max_abs_diff(&ct, &naive_ct(&rec, alpha_pct)) < 1e-10, "ct seed {seed} alpha {alpha_pct}");
            assert!(max_abs_diff(&md, &naive_md(&rec, alpha_pct)) < 1e-10, "md seed {seed} alpha {alpha_pct}");
        }
        for range_k in [1, 10, 600] {
            let cfg = FeatureConfig { alpha_pct: 0.1, range_k };
            let rd = rd_network(&rec, &cfg).unwrap();
            assert!(max_abs_diff(&rd, &naive_rd(&rec, range_k)) < 1e-10, "rd seed {seed} k {range_k}");
        }
    }
}

#[test]
fn feature_outputs_are_symmetric_with_zero_diagonal() {
    let rec = random_recording(8, 300, 5);
    let cfg = FeatureConfig { alpha_pct: 5.0, range_k: 10 };
    assert_symmetric_zero_diagonal(&corr_network(&rec));
    assert_symmetric_zero_diagonal(&ct_network(&rec, &cfg).unwrap());
    assert_symmetric_zero_diagonal(&md_network(&rec, &cfg).unwrap());
    assert_symmetric_zero_diagonal(&rd_network(&rec, &cfg).unwrap());
}

#[test]
fn ct_and_md_ignore_positive_affine_rescaling() {
    let rec = random_recording(8, 400, 9);
    let mut r = rng(99);
    let scaled: Vec<Vec<f64>> = rec
        .traces()
        .map(|x| {
            let a = 0.1 + 20.0 * r.random::<f64>();
            let b = 50.0 * r.random::<f64>() - 25.0;
            x.iter().map(|v| a * v + b).collect()
        })
        .collect();
    let scaled = FluorescenceRecording::from_traces(scaled).unwrap();
    let cfg = FeatureConfig { alpha_pct: 5.0, range_k: 10 };
    let pairs = [
        (ct_network(&rec, &cfg).unwrap(), ct_network(&scaled, &cfg).unwrap()),
        (md_network(&rec, &cfg).unwrap(), md_network(&scaled, &cfg).unwrap()),
    ];
    for (a, b) in pairs {
        assert!(max_abs_diff(&a, &rows_of(&b)) < 1e-8, "{}", a.name());
    }
}

#[test]
fn rd_is_nonnegative_with_a_zero_at_the_widest_pair() {
    for seed in 0..4 {
        let rec = random_recording(9, 200, seed);
        let rd = rd_network(&rec, &FeatureConfig::default()).unwrap();
        let off: Vec<f64> = (0..9).flat_map(|i| (0..9).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| rd.get(i, j)).collect();
        assert!(off.iter().all(|&v| v >= 0.0));
        assert!(off.contains(&0.0));
    }
}

#[test]
fn clr_matches_entrywise_oracle() {
    let mut r = rng(2024);
    for _ in 0..200 {
        let s = random_symmetric(10, &mut r);
        let got = clr(&to_matrix(&s, "s")).unwrap();
        assert!(max_abs_diff(&got, &naive_clr(&s)) < 1e-12);
        assert_symmetric_zero_diagonal(&got);
    }
}

#[test]
fn clr_sum_is_sum_of_member_clrs() {
    let mut r = rng(7);
    let members: Vec<ScoreMatrix> = (0..4).map(|k| to_matrix(&random_symmetric(12, &mut r), &format!("m{k}"))).collect();
    let total = clr_sum(&members).unwrap();
    let mut expected = vec![0.0; 144];
    for m in &members {
        for (e, v) in expected.iter_mut().zip(clr(m).unwrap().values()) {
            *e += v;
        }
    }
    assert_eq!(total.values(), expected.as_slice());
}

fn permute(s: &[Vec<f64>], p: &[usize]) -> Vec<Vec<f64>> {
    let n = s.len();
    (0..n).map(|i| (0..n).map(|j| s[p[i]][p[j]]).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clr_is_affine_invariant(seed in any::<u64>(), a in 0.01f64..100.0, b in -100.0f64..100.0) {
        let mut r = rng(seed);
        let s = random_symmetric(9, &mut r);
        let t: Vec<Vec<f64>> = s.iter().enumerate().map(|(i, row)| row.iter().enumerate().map(|(j, v)| if i == j { 0.0 } else { a * v + b }).collect()).collect();
        let base = clr(&to_matrix(&s, "s")).unwrap();
        let moved = clr(&to_matrix(&t, "t")).unwrap();
        prop_assert!(max_abs_diff(&base, &rows_of(&moved)) < 1e-10);
    }

    #[test]
    fn clr_commutes_with_relabeling(seed in any::<u64>(), perm in Just((0..8).collect::<Vec<usize>>()).prop_shuffle()) {
        let mut r = rng(seed);
        let s = random_symmetric(8, &mut r);
        let lhs = clr(&to_matrix(&permute(&s, &perm), "ps")).unwrap();
        let rhs = permute(&rows_of(&clr(&to_matrix(&s, "s")).unwrap()), &perm);
        // row sums run in a different order after relabeling
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn rank_sum_ignores_monotone_transforms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_symmetric(7, &mut r);
        let b = random_symmetric(7, &mut r);
        let mono = |s: &[Vec<f64>], f: fn(f64) -> f64| -> Vec<Vec<f64>> {
            s.iter().enumerate().map(|(i, row)| row.iter().enumerate().map(|(j, &v)| if i == j { 0.0 } else { f(v) }).collect()).collect()
        };
        let plain = rank_sum(&[to_matrix(&a, "a"), to_matrix(&b, "b")]).unwrap();
        let bent = rank_sum(&[to_matrix(&mono(&a, f64::exp), "a"), to_matrix(&mono(&b, |v| v * v * v + 2.0 * v), "b")]).unwrap();
        prop_assert_eq!(plain.values(), bent.values());
    }

    #[test]
    fn quantile_matches_definition(x in prop::collection::vec(-5i32..5, 1..80), alpha in 0.5f64..60.0) {
        let x: Vec<f64> = x.into_iter().map(f64::from).collect();
        prop_assert_eq!(upper_quantile(&x, alpha), naive_upper_quantile(&x, alpha));
    }
}

fn random_labeled(r: &mut rand_chacha::ChaCha8Rng) -> (Vec<f64>, Vec<bool>) {
    let n = r.random_range(2..=50);
    // coarse scores so tie blocks are common
    let levels = r.random_range(1..=20);
    let mut labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.3)).collect();
    labels[0] = true;
    labels[1] = false;
    let scores = (0..n).map(|_| f64::from(r.random_range(0..levels)) / 7.0).collect();
    (scores, labels)
}

#[test]
fn curve_metrics_match_brute_force() {
    let mut r = rng(31);
    for _ in 0..1000 {
        let (scores, labels) = random_labeled(&mut r);
        let ls = LabeledScores::from_pairs(&scores, &labels);
        let auc = roc_auc(&ls).unwrap();
        assert!((auc - brute_auc(&scores, &labels)).abs() < 1e-12);
        let total: f64 = auc_contributions(&ls).unwrap().values().sum();
        assert!((total - auc).abs() < 1e-10);
        let pr = aupr(&ls).unwrap();
        assert!((pr - sweep_aupr(&scores, &labels)).abs() < 1e-12);
        let pr_total: f64 = aupr_contributions(&ls).unwrap().values().sum();
        assert!((pr_total - pr).abs() < 1e-10);
    }
}

#[test]
fn auc_of_negated_scores_is_complement() {
    let mut r = rng(32);
    for _ in 0..500 {
        let (scores, labels) = random_labeled(&mut r);
        let neg: Vec<f64> = scores.iter().map(|v| -v).collect();
        let a = roc_auc(&LabeledScores::from_pairs(&scores, &labels)).unwrap();
        let b = roc_auc(&LabeledScores::from_pairs(&neg, &labels)).unwrap();
        assert_eq!(a + b, 1.0);
    }
}

#[test]
fn auc_ignores_increasing_transforms() {
    let mut r = rng(33);
    for _ in 0..300 {
        let (scores, labels) = random_labeled(&mut r);
        let bent: Vec<f64> = scores.iter().map(|v| (3.0 * v).exp() - 1.0).collect();
        let a = roc_auc(&LabeledScores::from_pairs(&scores, &labels)).unwrap();
        let b = roc_auc(&LabeledScores::from_pairs(&bent, &labels)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn aupr_stays_above_worst_ranking() {
    let mut r = rng(34);
    for _ in 0..500 {
        let (scores, labels) = random_labeled(&mut r);
        let p = labels.iter().filter(|&&l| l).count();
        let neg = labels.len() - p;
        // every positive ranked below every negative
        let worst: f64 = (1..=p).map(|k| k as f64 / (neg + k) as f64).sum::<f64>() / p as f64;
        let v = aupr(&LabeledScores::from_pairs(&scores, &labels)).unwrap();
        assert!(v >= worst - 1e-12 && v <= 1.0 + 1e-12);
    }
}

#[test]
fn wilcoxon_matches_sign_enumeration() {
    let mut r = rng(35);
    for _ in 0..100 {
        let n = r.random_range(1..=12);
        // small integer grids give zeros and tied magnitudes
        let a: Vec<f64> = (0..n).map(|_| f64::from(r.random_range(0..6))).collect();
        let b: Vec<f64> = (0..n).map(|_| f64::from(r.random_range(0..6))).collect();
        let got = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!((got - enumerate_wilcoxon(&a, &b)).abs() < 1e-12, "{a:?} {b:?}");
    }
    for n in 1..=12 {
        let a: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let got = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!((got - enumerate_wilcoxon(&a, &b)).abs() < 1e-12);
    }
}
