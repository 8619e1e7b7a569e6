//! Fusion algebra and accuracy properties, checked against direct enumeration.

use bsr_core::fusion::{accuracy, argmax, fuse, predict, sweep_combinations, FusionSpec, Truth};
use bsr_core::scores::ScoreMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, ids: &[String], labels: &[String]) -> ScoreMatrix {
    let k = labels.len();
    let mut probs = Vec::with_capacity(ids.len() * k);
    for _ in ids {
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0f64).powi(3) + 1e-6).collect();
        let s: f64 = raw.iter().sum();
        probs.extend(raw.iter().map(|v| v / s));
    }
    ScoreMatrix::new(ids.to_vec(), labels.to_vec(), probs).unwrap()
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s).collect()
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

#[test]
fn convex_idempotent_and_order_free_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let (n_utt, k, n_src) = (rng.random_range(1..8), rng.random_range(2..6), rng.random_range(1..5));
        let ids = names("u", n_utt);
        let labels = names("c", k);
        let sources: Vec<ScoreMatrix> = (0..n_src).map(|_| random_matrix(&mut rng, &ids, &labels)).collect();
        let weights = random_weights(&mut rng, n_src);

        let fused = fuse(&FusionSpec::new(sources.iter().collect(), weights.clone()).unwrap()).unwrap();
        for (r, row) in fused.rows().enumerate() {
            assert!(row.iter().all(|&p| p >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for (c, &v) in row.iter().enumerate() {
                let direct: f64 = sources.iter().zip(&weights).map(|(s, w)| w * s.row(r)[c]).sum();
                assert!((v - direct).abs() < 1e-12);
            }
        }

        let mut order: Vec<usize> = (0..n_src).collect();
        order.shuffle(&mut rng);
        let permuted = fuse(
            &FusionSpec::new(order.iter().map(|&i| &sources[i]).collect(), order.iter().map(|&i| weights[i]).collect())
                .unwrap(),
        )
        .unwrap();
        for (a, b) in fused.probs.iter().zip(&permuted.probs) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(predict(&fused), predict(&permuted));

        let copies: Vec<&ScoreMatrix> = (0..n_src).map(|_| &sources[0]).collect();
        let same = fuse(&FusionSpec::new(copies, weights).unwrap()).unwrap();
        assert_eq!(same.probs, sources[0].probs);
    }
}

#[test]
fn worked_two_source_example() {
    let ids = vec!["u".to_string()];
    let labels = vec!["a".to_string(), "b".to_string()];
    let a = ScoreMatrix::new(ids.clone(), labels.clone(), vec![0.6, 0.4]).unwrap();
    let b = ScoreMatrix::new(ids, labels, vec![0.3, 0.7]).unwrap();
    let f = fuse(&FusionSpec::equal(vec![&a, &b]).unwrap()).unwrap();
    assert!((f.probs[0] - 0.45).abs() < 1e-12 && (f.probs[1] - 0.55).abs() < 1e-12);
    assert_eq!(argmax(f.row(0)), 1);
}

#[test]
fn argmax_ignores_positive_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let row: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
        let s = rng.random_range(1e-3..1e3);
        let scaled: Vec<f64> = row.iter().map(|v| v * s).collect();
        assert_eq!(argmax(&row), argmax(&scaled));
    }
    assert_eq!(argmax(&[0.5, 0.5]), 0);
}

/// Three sources over 12 utterances of 3 classes. Each source errs on its own block of
/// four utterances with a low-confidence wrong answer and is confident elsewhere.
fn complementary_fixture() -> (Vec<(String, ScoreMatrix)>, Truth) {
    let labels = names("k", 3);
    let ids = names("utt", 12);
    let truth: Truth = ids.iter().enumerate().map(|(i, id)| (id.clone(), labels[i % 3].clone())).collect();
    let sources = (0..3)
        .map(|s| {
            let mut probs = Vec::new();
            for i in 0..12 {
                let t = i % 3;
                let mut row = [0.0; 3];
                if i / 4 == s {
                    row[(t + 1) % 3] = 0.40;
                    row[t] = 0.35;
                    row[(t + 2) % 3] = 0.25;
                } else {
                    row[t] = 0.80;
                    row[(t + 1) % 3] = 0.10;
                    row[(t + 2) % 3] = 0.10;
                }
                probs.extend(row);
            }
            (format!("src{s}"), ScoreMatrix::new(ids.clone(), labels.clone(), probs).unwrap())
        })
        .collect();
    (sources, truth)
}

/// Equal-weight fused accuracy computed from scratch, without the library's fuse.
fn brute_accuracy(sources: &[&ScoreMatrix], truth: &Truth) -> f64 {
    let m = sources[0];
    let k = m.class_labels.len();
    let mut correct = 0;
    for (r, id) in m.utt_ids.iter().enumerate() {
        let mut best = (0, f64::NEG_INFINITY);
        for c in 0..k {
            let v: f64 = sources.iter().map(|s| s.row(r)[c]).sum::<f64>() / sources.len() as f64;
            if v > best.1 {
                best = (c, v);
            }
        }
        if m.class_labels[best.0] == truth[id] {
            correct += 1;
        }
    }
    100.0 * correct as f64 / m.utt_ids.len() as f64
}

#[test]
fn complementary_errors_fusion_beats_every_member() {
    let (sources, truth) = complementary_fixture();
    let rows = sweep_combinations(&sources, &truth).unwrap();
    assert_eq!(rows.len(), 7);
    for row in &rows {
        let mats: Vec<&ScoreMatrix> = row.members.iter().map(|&i| &sources[i].1).collect();
        assert!((row.accuracy - brute_accuracy(&mats, &truth)).abs() < 1e-9, "{}", row.name);
        if row.members.len() > 1 {
            for &m in &row.members {
                let single = brute_accuracy(&[&sources[m].1], &truth);
                assert!(row.accuracy > single, "{} ({}) vs {} ({single})", row.name, row.accuracy, sources[m].0);
            }
        }
    }
}

#[test]
fn weight_sweep_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let ids = names("u", 40);
    let labels = names("c", 4);
    let a = random_matrix(&mut rng, &ids, &labels);
    let b = random_matrix(&mut rng, &ids, &labels);
    let truth: Truth = ids.iter().map(|id| (id.clone(), labels[rng.random_range(0..4)].clone())).collect();
    for step in 0..=100 {
        let w = step as f64 / 100.0;
        let fused = fuse(&FusionSpec::new(vec![&a, &b], vec![1.0 - w, w]).unwrap()).unwrap();
        let mut correct = 0;
        for (r, id) in ids.iter().enumerate() {
            let v: Vec<f64> = (0..4).map(|c| (1.0 - w) * a.row(r)[c] + w * b.row(r)[c]).collect();
            let mut best = 0;
            for c in 1..4 {
                if v[c] > v[best] {
                    best = c;
                }
            }
            correct += usize::from(labels[best] == truth[id]);
        }
        let expected = 100.0 * correct as f64 / 40.0;
        assert!((accuracy(&fused, &truth).unwrap() - expected).abs() < 1e-9, "w = {w}");
    }
}

#[test]
fn four_sources_give_fourteen_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ids = names("u", 5);
    let labels = names("c", 3);
    let sources: Vec<(String, ScoreMatrix)> =
        (0..4).map(|i| (format!("f{i}"), random_matrix(&mut rng, &ids, &labels))).collect();
    let truth: Truth = ids.iter().map(|id| (id.clone(), labels[0].clone())).collect();
    let rows = sweep_combinations(&sources, &truth).unwrap();
    assert_eq!(rows.len(), 14);
    assert_eq!(rows[4].name, "f0&f1");
    assert_eq!(rows[13].name, "f1&f2&f3");
}

#[test]
fn misaligned_sources_are_rejected() {
    let labels = names("c", 2);
    let a = ScoreMatrix::new(names("u", 2), labels.clone(), vec![0.5, 0.5, 0.5, 0.5]).unwrap();
    let b = ScoreMatrix::new(vec!["u0".into(), "zz".into()], labels, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
    assert!(fuse(&FusionSpec::equal(vec![&a, &b]).unwrap()).is_err());
}
