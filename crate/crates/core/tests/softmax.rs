//! Softmax normalization, shift invariance and the cross-entropy gradient
//! against central finite differences.

use parcelsense::labeler::softmax::{cross_entropy_gradient, cross_entropy_loss, softmax};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn probabilities_sum_to_one(z in prop::collection::vec(-700.0f64..700.0, 1..12)) {
        let p = softmax(&z).probs;
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9, "sum {sum}");
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn shift_keeps_argmax(z in prop::collection::vec(-50.0f64..50.0, 1..12), c in -1e3f64..1e3) {
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        let (a, b) = (softmax(&z), softmax(&shifted));
        prop_assert_eq!(a.argmax(), b.argmax());
        for (x, y) in a.probs.iter().zip(&b.probs) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }
}

/// Norm-wise relative error `|a - n| / max(|a| + |n|, 1e-12)`.
fn relative_error(a: &[f64], n: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(n).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt() + n.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-5;
    for _ in 0..100 {
        let k = rng.random_range(2..=4);
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=5);
        let weights: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let ys: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let batch: Vec<(&[f64], usize)> = xs.iter().map(|x| x.as_slice()).zip(ys.iter().copied()).collect();
        let analytic: Vec<f64> = cross_entropy_gradient(&weights, &batch).concat();
        let mut numeric = Vec::new();
        for r in 0..k {
            for c in 0..=d {
                let mut plus = weights.clone();
                let mut minus = weights.clone();
                plus[r][c] += h;
                minus[r][c] -= h;
                numeric.push((cross_entropy_loss(&plus, &batch) - cross_entropy_loss(&minus, &batch)) / (2.0 * h));
            }
        }
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-5, "relative error {err}");
    }
}
