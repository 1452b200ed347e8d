//! Random forest over parcel semantic features.
//!
//! Each tree is grown unpruned on its own bootstrap sample with random
//! feature selection at every split. Samples left out of a tree's bootstrap
//! are scored by that tree, and the out-of-bag error is the misclassification
//! rate of the per-sample OOB majority vote.

pub mod tree;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::LandUseLabel;
use crate::labeler::split::floor_count;
use crate::rng::{self, Domain};
pub use tree::{grow_tree, DecisionTree, Node, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` means `floor(sqrt(F))`, at least 1.
    pub features_per_split: Option<usize>,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            features_per_split: None,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn resolved_features_per_split(&self, feature_count: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (feature_count as f64).sqrt().floor() as usize)
            .max(1)
    }

    pub fn validate(&self, feature_count: usize) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::invalid("n_trees must be at least 1"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::invalid("min_samples_leaf must be at least 1"));
        }
        let k = self.resolved_features_per_split(feature_count);
        if k > feature_count.max(1) {
            return Err(Error::invalid(format!(
                "features_per_split {k} exceeds feature count {feature_count}"
            )));
        }
        Ok(())
    }
}

/// Bootstrap draw: `in_bag` has exactly `n` indices (with repeats),
/// `out_of_bag` the sorted indices never drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bag {
    pub in_bag: Vec<usize>,
    pub out_of_bag: Vec<usize>,
}

pub fn bootstrap_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Bag {
    let in_bag: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut seen = vec![false; n];
    for &i in &in_bag {
        seen[i] = true;
    }
    let out_of_bag = (0..n).filter(|&i| !seen[i]).collect();
    Bag { in_bag, out_of_bag }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub config: ForestConfig,
    /// Classes seen in training, in canonical order; tree leaves index this.
    pub classes: Vec<LandUseLabel>,
    pub feature_count: usize,
    pub oob_error: f64,
    /// Samples that were out of bag for at least one tree. `oob_error` is
    /// 0 when this is 0.
    pub oob_samples: usize,
    pub trees: Vec<DecisionTree>,
}

impl ForestModel {
    /// Vote count per entry of `classes`.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>> {
        if x.len() != self.feature_count {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.feature_count,
            });
        }
        let mut votes = vec![0; self.classes.len()];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        Ok(votes)
    }

    /// Majority vote; ties go to the class earliest in M, I, G, C, R, P, U.
    pub fn predict(&self, x: &[f64]) -> Result<LandUseLabel> {
        Ok(self.classes[tree::majority(&self.votes(x)?)])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: ForestModel = serde_json::from_str(&text)?;
        if model.trees.is_empty() || model.classes.is_empty() {
            return Err(Error::invalid("forest model has no trees or classes"));
        }
        Ok(model)
    }
}

pub fn predict(model: &ForestModel, feature: &[f64]) -> Result<LandUseLabel> {
    model.predict(feature)
}

pub fn train_forest(features: &[Vec<f64>], labels: &[LandUseLabel], config: &ForestConfig) -> Result<ForestModel> {
    train_forest_with_bags(features, labels, config).map(|(m, _)| m)
}

/// Trains and also returns each tree's bootstrap bag. Tree `t` uses the RNG
/// stream `(config.seed, t)` for both its bag and its feature draws.
pub fn train_forest_with_bags(
    features: &[Vec<f64>],
    labels: &[LandUseLabel],
    config: &ForestConfig,
) -> Result<(ForestModel, Vec<Bag>)> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    let Some(first) = features.first() else {
        return Err(Error::invalid("empty training set"));
    };
    let feature_count = first.len();
    if let Some(bad) = features.iter().find(|f| f.len() != feature_count) {
        return Err(Error::LengthMismatch {
            left: bad.len(),
            right: feature_count,
        });
    }
    config.validate(feature_count)?;
    let mut classes: Vec<LandUseLabel> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let y: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label collected above"))
        .collect();
    let params = TreeParams {
        features_per_split: config.resolved_features_per_split(feature_count),
        min_samples_leaf: config.min_samples_leaf,
        n_classes: classes.len(),
    };
    let grown: Vec<(DecisionTree, Bag)> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(config.seed, Domain::Tree, t as u64);
            let bag = bootstrap_sample(features.len(), &mut rng);
            let tree = grow_tree(features, &y, &bag.in_bag, &params, &mut rng);
            (tree, bag)
        })
        .collect();
    let (trees, bags): (Vec<_>, Vec<_>) = grown.into_iter().unzip();
    let (oob_error, oob_samples) = oob_error(&trees, &bags, features, &y, classes.len());
    Ok((
        ForestModel {
            config: *config,
            classes,
            feature_count,
            oob_error,
            oob_samples,
            trees,
        },
        bags,
    ))
}

fn oob_error(trees: &[DecisionTree], bags: &[Bag], x: &[Vec<f64>], y: &[usize], n_classes: usize) -> (f64, usize) {
    let mut votes = vec![vec![0usize; n_classes]; x.len()];
    for (tree, bag) in trees.iter().zip(bags) {
        for &i in &bag.out_of_bag {
            votes[i][tree.predict(&x[i])] += 1;
        }
    }
    let mut scored = 0;
    let mut wrong = 0;
    for (v, &truth) in votes.iter().zip(y) {
        if v.iter().all(|&c| c == 0) {
            continue;
        }
        scored += 1;
        if tree::majority(v) != truth {
            wrong += 1;
        }
    }
    if scored == 0 {
        (0.0, 0)
    } else {
        (wrong as f64 / scored as f64, scored)
    }
}

/// Held-out estimate: trains on a random `1 - holdout` share and reports the
/// error on the rest alongside the model.
pub fn holdout_error(
    features: &[Vec<f64>],
    labels: &[LandUseLabel],
    config: &ForestConfig,
    holdout: f64,
) -> Result<(ForestModel, f64)> {
    if !(0.0..1.0).contains(&holdout) || holdout == 0.0 {
        return Err(Error::invalid("holdout fraction must lie in (0, 1)"));
    }
    let mut idx: Vec<usize> = (0..features.len()).collect();
    idx.shuffle(&mut rng::stream(config.seed, Domain::Split, 1));
    let n_hold = floor_count(holdout, idx.len());
    let (held, kept) = idx.split_at(n_hold);
    if held.is_empty() {
        return Err(Error::invalid("holdout split is empty"));
    }
    let pick = |ix: &[usize]| -> (Vec<Vec<f64>>, Vec<LandUseLabel>) {
        (
            ix.iter().map(|&i| features[i].clone()).collect(),
            ix.iter().map(|&i| labels[i]).collect(),
        )
    };
    let (xt, yt) = pick(kept);
    let model = train_forest(&xt, &yt, config)?;
    let mut wrong = 0;
    for &i in held {
        if model.predict(&features[i])? != labels[i] {
            wrong += 1;
        }
    }
    Ok((model, wrong as f64 / held.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use LandUseLabel::*;

    #[test]
    fn bootstrap_of_one() {
        let b = bootstrap_sample(1, &mut seeded(0));
        assert_eq!(b.in_bag, vec![0]);
        assert!(b.out_of_bag.is_empty());
    }

    #[test]
    fn bootstrap_size_is_n() {
        let mut rng = seeded(1);
        for n in [2, 7, 100] {
            let b = bootstrap_sample(n, &mut rng);
            assert_eq!(b.in_bag.len(), n);
            assert!(b.out_of_bag.iter().all(|i| !b.in_bag.contains(i)));
        }
    }

    #[test]
    fn single_tree_forest_matches_tree() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![M, M, I, I];
        let cfg = ForestConfig {
            n_trees: 1,
            ..Default::default()
        };
        let m = train_forest(&x, &y, &cfg).unwrap();
        for xi in &x {
            assert_eq!(m.predict(xi).unwrap(), m.classes[m.trees[0].predict(xi)]);
        }
    }

    #[test]
    fn tie_goes_to_canonical_order() {
        let leaf = |c| DecisionTree {
            nodes: vec![Node::Leaf { class: c }],
        };
        let m = ForestModel {
            config: ForestConfig::default(),
            classes: vec![G, R],
            feature_count: 1,
            oob_error: 0.0,
            oob_samples: 0,
            trees: vec![leaf(1), leaf(0), leaf(1), leaf(0)],
        };
        assert_eq!(m.predict(&[0.0]).unwrap(), G);
        assert!(matches!(m.predict(&[0.0, 1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn training_errors() {
        let cfg = ForestConfig::default();
        assert!(matches!(
            train_forest(&[vec![1.0], vec![2.0]], &[R, R], &cfg),
            Err(Error::SingleClass)
        ));
        assert!(matches!(
            train_forest(&[vec![1.0]], &[R, G], &cfg),
            Err(Error::LengthMismatch { .. })
        ));
        let bad = ForestConfig {
            features_per_split: Some(3),
            ..cfg
        };
        assert!(train_forest(&[vec![1.0], vec![2.0]], &[R, G], &bad).is_err());
    }

    #[test]
    fn default_features_per_split() {
        let c = ForestConfig::default();
        assert_eq!(c.resolved_features_per_split(1), 1);
        assert_eq!(c.resolved_features_per_split(10), 3);
        assert_eq!(c.resolved_features_per_split(16), 4);
    }

    #[test]
    fn retraining_is_bit_identical() {
        let mut rng = seeded(5);
        let x: Vec<Vec<f64>> = (0..40).map(|_| (0..5).map(|_| rng.random()).collect()).collect();
        let y: Vec<LandUseLabel> = (0..40).map(|i| if i % 3 == 0 { C } else { U }).collect();
        let cfg = ForestConfig {
            n_trees: 20,
            seed: 9,
            ..Default::default()
        };
        let a = train_forest(&x, &y, &cfg).unwrap().to_json().unwrap();
        let b = train_forest(&x, &y, &cfg).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }
}
