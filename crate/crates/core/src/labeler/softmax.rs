//! Multinomial logistic regression over patch features, trained by
//! mini-batch gradient descent on the cross-entropy loss.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::{featurize_patch, LAYOUT_VERSION};
use super::LandCoverWord;
use crate::error::{Error, Result};
use crate::rng;
use crate::sampler::PatchSample;

/// Probability vector over classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution {
    pub probs: Vec<f64>,
}

impl LabelDistribution {
    /// Index of the largest probability, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `exp(z_j) / sum_k exp(z_k)`, evaluated after subtracting `max(z)`.
pub fn softmax(z: &[f64]) -> LabelDistribution {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    LabelDistribution {
        probs: exps.into_iter().map(|e| e / total).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    pub classes: Vec<String>,
    pub layout_version: u32,
    pub feature_len: usize,
    /// One row per class: `feature_len` weights followed by the bias.
    pub weights: Vec<Vec<f64>>,
}

impl SoftmaxModel {
    pub fn zeros(classes: Vec<String>, feature_len: usize) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::SingleClass);
        }
        let k = classes.len();
        Ok(SoftmaxModel {
            classes,
            layout_version: LAYOUT_VERSION,
            feature_len,
            weights: vec![vec![0.0; feature_len + 1]; k],
        })
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_len {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.feature_len,
            });
        }
        Ok(self.weights.iter().map(|row| affine(row, x)).collect())
    }

    pub fn distribution(&self, x: &[f64]) -> Result<LabelDistribution> {
        Ok(softmax(&self.logits(x)?))
    }

    pub fn predict_index(&self, x: &[f64]) -> Result<usize> {
        Ok(self.distribution(x)?.argmax())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: SoftmaxModel = serde_json::from_str(&text)?;
        if model.layout_version != LAYOUT_VERSION {
            return Err(Error::invalid(format!(
                "model feature layout v{} is not supported (expected v{LAYOUT_VERSION})",
                model.layout_version
            )));
        }
        if model.classes.len() < 2
            || model.weights.len() != model.classes.len()
            || model.weights.iter().any(|r| r.len() != model.feature_len + 1)
        {
            return Err(Error::invalid("inconsistent softmax model dimensions"));
        }
        Ok(model)
    }
}

#[inline]
fn affine(row: &[f64], x: &[f64]) -> f64 {
    let (w, bias) = row.split_at(x.len());
    w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + bias[0]
}

/// Most probable word for a patch, lowest class index on ties.
pub fn predict_word(model: &SoftmaxModel, patch: &PatchSample) -> Result<LandCoverWord> {
    let idx = model.predict_index(featurize_patch(patch).as_slice())?;
    Ok(LandCoverWord(model.classes[idx].clone()))
}

/// Mean cross-entropy of `batch` under `weights`.
pub fn cross_entropy_loss(weights: &[Vec<f64>], batch: &[(&[f64], usize)]) -> f64 {
    let total: f64 = batch
        .iter()
        .map(|(x, y)| {
            let z: Vec<f64> = weights.iter().map(|r| affine(r, x)).collect();
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - z[*y]
        })
        .sum();
    total / batch.len() as f64
}

/// Analytic gradient of [`cross_entropy_loss`]: `mean((p - onehot(y)) x~)`.
pub fn cross_entropy_gradient(weights: &[Vec<f64>], batch: &[(&[f64], usize)]) -> Vec<Vec<f64>> {
    let cols = weights[0].len();
    let mut grad = vec![vec![0.0; cols]; weights.len()];
    accumulate_gradient(weights, batch, &mut grad);
    grad
}

fn accumulate_gradient(weights: &[Vec<f64>], batch: &[(&[f64], usize)], grad: &mut [Vec<f64>]) {
    for row in grad.iter_mut() {
        row.iter_mut().for_each(|g| *g = 0.0);
    }
    let scale = 1.0 / batch.len() as f64;
    for (x, y) in batch {
        let z: Vec<f64> = weights.iter().map(|r| affine(r, x)).collect();
        let p = softmax(&z).probs;
        for (k, row) in grad.iter_mut().enumerate() {
            let delta = (p[k] - if k == *y { 1.0 } else { 0.0 }) * scale;
            if delta == 0.0 {
                continue;
            }
            let (gw, gb) = row.split_at_mut(x.len());
            for (g, xi) in gw.iter_mut().zip(x.iter()) {
                *g += delta * xi;
            }
            gb[0] += delta;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            learning_rate: 0.001,
            iterations: 10_000,
            batch_size: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedSoftmax {
    pub model: SoftmaxModel,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
}

/// Trains from zero weights. Each epoch visits the training set in a fresh
/// permutation drawn from `params.seed`; every step consumes the next
/// `batch_size` samples of the permutation (the last batch of an epoch may
/// be shorter).
pub fn train_softmax(
    train: &[(Vec<f64>, usize)],
    validation: &[(Vec<f64>, usize)],
    classes: Vec<String>,
    params: &TrainParams,
) -> Result<TrainedSoftmax> {
    let Some(first) = train.first() else {
        return Err(Error::invalid("empty training set"));
    };
    let f = first.0.len();
    for (x, y) in train.iter().chain(validation) {
        if x.len() != f {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: f,
            });
        }
        if *y >= classes.len() {
            return Err(Error::invalid(format!("class index {y} out of range")));
        }
    }
    if train.iter().all(|(_, y)| *y == first.1) {
        return Err(Error::SingleClass);
    }
    if params.batch_size == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    let mut model = SoftmaxModel::zeros(classes, f)?;
    let mut rng = rng::seeded(params.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut cursor = order.len();
    let mut grad = vec![vec![0.0; f + 1]; model.classes.len()];
    let mut batch: Vec<(&[f64], usize)> = Vec::with_capacity(params.batch_size);
    for _ in 0..params.iterations {
        if cursor >= order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let end = (cursor + params.batch_size).min(order.len());
        batch.clear();
        batch.extend(order[cursor..end].iter().map(|&i| (train[i].0.as_slice(), train[i].1)));
        cursor = end;
        accumulate_gradient(&model.weights, &batch, &mut grad);
        for (row, g) in model.weights.iter_mut().zip(&grad) {
            for (w, gi) in row.iter_mut().zip(g) {
                *w -= params.learning_rate * gi;
            }
        }
    }
    let train_accuracy = accuracy(&model, train)?;
    let validation_accuracy = if validation.is_empty() {
        None
    } else {
        Some(accuracy(&model, validation)?)
    };
    Ok(TrainedSoftmax {
        model,
        train_accuracy,
        validation_accuracy,
    })
}

pub fn accuracy(model: &SoftmaxModel, data: &[(Vec<f64>, usize)]) -> Result<f64> {
    let mut correct = 0;
    for (x, y) in data {
        if model.predict_index(x)? == *y {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn symmetric_logits() {
        assert_eq!(softmax(&[0.0, 0.0]).probs, vec![0.5, 0.5]);
    }

    #[test]
    fn known_values() {
        // exp(1), exp(2), exp(3) normalised, evaluated independently
        let e: Vec<f64> = [1.0f64, 2.0, 3.0].iter().map(|v| v.exp()).collect();
        let s: f64 = e.iter().sum();
        let p = softmax(&[1.0, 2.0, 3.0]).probs;
        let expected = [0.09003057, 0.24472847, 0.66524096];
        for i in 0..3 {
            assert!((p[i] - expected[i]).abs() < 1e-8);
            assert!((p[i] - e[i] / s).abs() < 1e-15);
        }
    }

    #[test]
    fn shift_invariant_and_overflow_safe() {
        let mut rng = rng::seeded(3);
        for _ in 0..200 {
            let z: Vec<f64> = (0..5).map(|_| rng.random_range(-500.0..500.0)).collect();
            let c = rng.random_range(-100.0..100.0);
            let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
            let (a, b) = (softmax(&z), softmax(&shifted));
            assert!(a.probs.iter().all(|p| p.is_finite() && *p >= 0.0));
            assert!((a.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(a.argmax(), b.argmax());
            for (x, y) in a.probs.iter().zip(&b.probs) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_weights_predict_first_class() {
        let m = SoftmaxModel::zeros(vec!["a".into(), "b".into(), "c".into()], 4).unwrap();
        assert_eq!(m.predict_index(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 0);
    }

    #[test]
    fn bias_shift_keeps_prediction() {
        let mut m = SoftmaxModel::zeros(vec!["a".into(), "b".into()], 2).unwrap();
        m.weights = vec![vec![0.3, -1.0, 0.1], vec![-0.2, 0.5, 0.0]];
        let x = [0.7, 0.2];
        let before = m.predict_index(&x).unwrap();
        for row in &mut m.weights {
            row[2] += 17.0;
        }
        assert_eq!(m.predict_index(&x).unwrap(), before);
    }

    #[test]
    fn zero_learning_rate_leaves_weights() {
        let data = vec![(vec![1.0, 0.0], 0), (vec![0.0, 1.0], 1)];
        let params = TrainParams {
            learning_rate: 0.0,
            iterations: 50,
            batch_size: 1,
            seed: 1,
        };
        let t = train_softmax(&data, &[], vec!["a".into(), "b".into()], &params).unwrap();
        assert!(t.model.weights.iter().flatten().all(|&w| w == 0.0));
    }

    #[test]
    fn errors() {
        let classes = vec!["a".to_string(), "b".to_string()];
        let p = TrainParams::default();
        let single = vec![(vec![1.0], 0), (vec![2.0], 0)];
        assert!(matches!(
            train_softmax(&single, &[], classes.clone(), &p),
            Err(Error::SingleClass)
        ));
        let ragged = vec![(vec![1.0], 0), (vec![2.0, 1.0], 1)];
        assert!(matches!(
            train_softmax(&ragged, &[], classes, &p),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn duplicated_data_full_batch_same_trajectory() {
        let data = vec![(vec![0.9, 0.1], 0), (vec![0.2, 0.8], 1), (vec![0.5, 0.4], 0)];
        let doubled: Vec<_> = data.iter().chain(&data).cloned().collect();
        let params = TrainParams {
            learning_rate: 0.5,
            iterations: 200,
            batch_size: 10,
            seed: 4,
        };
        let classes = vec!["a".to_string(), "b".to_string()];
        let a = train_softmax(&data, &[], classes.clone(), &params).unwrap();
        let b = train_softmax(&doubled, &[], classes.clone(), &params).unwrap();
        for (ra, rb) in a.model.weights.iter().zip(&b.model.weights) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let again = train_softmax(&data, &[], classes, &params).unwrap();
        assert_eq!(a.model, again.model);
    }

    #[test]
    fn model_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = SoftmaxModel::zeros(vec!["x".into(), "y".into()], 3).unwrap();
        m.weights[1][2] = 0.1 + 0.2;
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        assert_eq!(SoftmaxModel::load(&path).unwrap(), m);
    }
}
