//! Random-forest determinism, bagging statistics and OOB behaviour.

use parcelsense::forest::{bootstrap_sample, holdout_error, train_forest, train_forest_with_bags, ForestConfig};
use parcelsense::geodata::LandUseLabel::{self, *};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(seed: u64) -> ForestConfig {
    ForestConfig {
        seed,
        ..ForestConfig::default()
    }
}

/// Two classes split by feature 0 with a gap; the other features are noise.
fn separable(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<LandUseLabel>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let a = i % 2 == 0;
        let mut row = vec![if a {
            rng.random_range(0.0..1.0)
        } else {
            rng.random_range(2.0..3.0)
        }];
        row.extend((0..3).map(|_| rng.random_range(0.0..1.0)));
        x.push(row);
        y.push(if a { R } else { C });
    }
    (x, y)
}

#[test]
fn retraining_is_bit_identical() {
    let (x, y) = separable(120, 1);
    let a = train_forest(&x, &y, &config(4)).unwrap().to_json().unwrap();
    let b = train_forest(&x, &y, &config(4)).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    let c = train_forest(&x, &y, &config(5)).unwrap().to_json().unwrap();
    assert_ne!(a, c);
}

#[test]
fn retraining_ignores_thread_count() {
    let (x, y) = separable(120, 2);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| train_forest(&x, &y, &config(8)).unwrap().to_json().unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn out_of_bag_fraction_near_inverse_e() {
    let n = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let reps = 500;
    let mean: f64 = (0..reps)
        .map(|_| bootstrap_sample(n, &mut rng).out_of_bag.len() as f64 / n as f64)
        .sum::<f64>()
        / reps as f64;
    let closed = (1.0 - 1.0 / n as f64).powi(n as i32);
    assert!((mean - closed).abs() <= 0.01, "{mean} vs {closed}");
    assert!((mean - (-1.0f64).exp()).abs() <= 0.01);
}

#[test]
fn separable_data_has_small_oob_error_close_to_holdout() {
    let (x, y) = separable(400, 3);
    let cfg = config(6);
    let model = train_forest(&x, &y, &cfg).unwrap();
    assert!(model.oob_error <= 0.05, "oob {}", model.oob_error);
    let (_, held) = holdout_error(&x, &y, &cfg, 0.2).unwrap();
    assert!(
        (model.oob_error - held).abs() <= 0.05,
        "oob {} held {held}",
        model.oob_error
    );
}

#[test]
fn shuffled_labels_give_chance_oob_error() {
    let (x, mut y) = separable(400, 4);
    y.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
    let model = train_forest(&x, &y, &config(7)).unwrap();
    assert!((model.oob_error - 0.5).abs() <= 0.1, "oob {}", model.oob_error);
}

#[test]
fn oob_error_matches_naive_recount() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(10..=50);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let y: Vec<LandUseLabel> = (0..n).map(|i| [M, G, U][i % 3]).collect();
        let cfg = ForestConfig {
            n_trees: 15,
            ..config(seed)
        };
        let (model, bags) = train_forest_with_bags(&x, &y, &cfg).unwrap();
        let mut wrong = 0;
        let mut scored = 0;
        for i in 0..n {
            let mut votes = vec![0usize; model.classes.len()];
            for (tree, bag) in model.trees.iter().zip(&bags) {
                if !bag.in_bag.contains(&i) {
                    votes[tree.predict(&x[i])] += 1;
                }
            }
            if votes.iter().all(|&v| v == 0) {
                continue;
            }
            scored += 1;
            let best = (0..votes.len()).rev().max_by_key(|&k| votes[k]).unwrap();
            wrong += (model.classes[best] != y[i]) as usize;
        }
        assert_eq!(model.oob_samples, scored);
        assert_eq!(model.oob_error, wrong as f64 / scored as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn column_scaling_keeps_split_features(scales in prop::collection::vec(0.1f64..10.0, 4), seed in 0u64..1000) {
        let (x, y) = separable(60, seed);
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| r.iter().zip(&scales).map(|(v, s)| v * s).collect()).collect();
        let cfg = ForestConfig { n_trees: 10, ..config(seed) };
        let a = train_forest(&x, &y, &cfg).unwrap();
        let b = train_forest(&scaled, &y, &cfg).unwrap();
        for (ta, tb) in a.trees.iter().zip(&b.trees) {
            prop_assert_eq!(ta.split_features(), tb.split_features());
        }
    }
}
