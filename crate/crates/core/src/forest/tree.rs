//! Unpruned CART classification tree with Gini splits.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        class: usize,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat node arena; node 0 is the root. Class values index the owning
/// forest's class list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Split features in depth-first (pre-order) order.
    pub fn split_features(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            if let Node::Split {
                feature, left, right, ..
            } = self.nodes[i]
            {
                out.push(feature);
                stack.push(right);
                stack.push(left);
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub features_per_split: usize,
    pub min_samples_leaf: usize,
    pub n_classes: usize,
}

pub fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

/// Majority class, lowest index on ties.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Grows a tree on `rows` (indices into `features`/`labels`; repeats allowed).
///
/// At each node `features_per_split` features are drawn without replacement
/// and the threshold minimizing the size-weighted child Gini impurity is
/// chosen among midpoints of consecutive distinct values. When none of the
/// drawn features can separate the node, the remaining features are tried
/// in random order before the node becomes a leaf. Growth stops only at pure
/// or unsplittable nodes.
pub fn grow_tree<R: Rng + ?Sized>(
    features: &[Vec<f64>],
    labels: &[usize],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut R,
) -> DecisionTree {
    assert!(!rows.is_empty(), "grow_tree needs at least one sample");
    let n_features = features[rows[0]].len();
    let mut nodes = Vec::new();
    let mut feature_order: Vec<usize> = (0..n_features).collect();
    // (node slot, rows)
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, rows.to_vec())];
    nodes.push(Node::Leaf { class: 0 });
    while let Some((slot, node_rows)) = stack.pop() {
        let mut counts = vec![0usize; params.n_classes];
        for &r in &node_rows {
            counts[labels[r]] += 1;
        }
        let leaf = Node::Leaf {
            class: majority(&counts),
        };
        if counts.iter().filter(|&&c| c > 0).count() <= 1 || node_rows.len() < 2 * params.min_samples_leaf {
            nodes[slot] = leaf;
            continue;
        }
        feature_order.shuffle(rng);
        let k = params.features_per_split.clamp(1, n_features.max(1));
        let mut best = best_split(features, labels, &node_rows, &feature_order[..k], params);
        if best.is_none() {
            best = best_split(features, labels, &node_rows, &feature_order[k..], params);
        }
        let Some(split) = best else {
            nodes[slot] = leaf;
            continue;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = node_rows
            .iter()
            .partition(|&&r| features[r][split.feature] <= split.threshold);
        let left = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        let right = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        nodes[slot] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        stack.push((right, right_rows));
        stack.push((left, left_rows));
    }
    DecisionTree { nodes }
}

fn best_split(
    features: &[Vec<f64>],
    labels: &[usize],
    rows: &[usize],
    candidates: &[usize],
    params: &TreeParams,
) -> Option<Candidate> {
    let n = rows.len();
    let mut total = vec![0usize; params.n_classes];
    for &r in rows {
        total[labels[r]] += 1;
    }
    let mut best: Option<Candidate> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &f in candidates {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (features[r][f], labels[r])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = vec![0usize; params.n_classes];
        for i in 0..n - 1 {
            left[sorted[i].1] += 1;
            let (v, next) = (sorted[i].0, sorted[i + 1].0);
            if v == next {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < params.min_samples_leaf || n_right < params.min_samples_leaf {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let impurity = (n_left as f64 * gini(&left, n_left) + n_right as f64 * gini(&right, n_right)) / n as f64;
            if best.is_none_or(|b| impurity < b.impurity) {
                best = Some(Candidate {
                    feature: f,
                    threshold: midpoint(v, next),
                    impurity,
                });
            }
        }
    }
    best
}

/// Midpoint of `a < b` that still separates them.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn params(n_classes: usize, k: usize) -> TreeParams {
        TreeParams {
            features_per_split: k,
            min_samples_leaf: 1,
            n_classes,
        }
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![2, 2, 2];
        let t = grow_tree(&x, &y, &[0, 1, 2], &params(3, 1), &mut seeded(0));
        assert_eq!(t.nodes, vec![Node::Leaf { class: 2 }]);
    }

    #[test]
    fn one_dimensional_split_at_midpoint() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![0, 1];
        let t = grow_tree(&x, &y, &[0, 1], &params(2, 1), &mut seeded(0));
        assert_eq!(
            t.nodes[0],
            Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 1,
                right: 2
            }
        );
        assert_eq!(t.nodes[1], Node::Leaf { class: 0 });
        assert_eq!(t.nodes[2], Node::Leaf { class: 1 });
    }

    #[test]
    fn exhaustive_gini_picks_best_threshold() {
        // labels along the axis: 0 0 1 0 1 1 ; best cut by brute force
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![0, 0, 1, 0, 1, 1];
        let x: Vec<Vec<f64>> = xs.iter().map(|&v| vec![v]).collect();
        let mut best = (f64::INFINITY, 0.0);
        for cut in 1..6 {
            let (l, r) = y.split_at(cut);
            let g = |s: &[usize]| {
                let ones = s.iter().filter(|&&c| c == 1).count() as f64;
                let n = s.len() as f64;
                1.0 - (ones / n).powi(2) - ((n - ones) / n).powi(2)
            };
            let w = (l.len() as f64 * g(l) + r.len() as f64 * g(r)) / 6.0;
            if w < best.0 {
                best = (w, (xs[cut - 1] + xs[cut]) / 2.0);
            }
        }
        let t = grow_tree(&x, &y, &[0, 1, 2, 3, 4, 5], &params(2, 1), &mut seeded(0));
        match t.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(threshold, best.1),
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn unpruned_tree_fits_distinct_points() {
        let mut rng = seeded(11);
        let x: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
        let y: Vec<usize> = (0..60).map(|_| rng.random_range(0..3)).collect();
        let rows: Vec<usize> = (0..60).collect();
        let t = grow_tree(&x, &y, &rows, &params(3, 2), &mut rng);
        for i in 0..60 {
            assert_eq!(t.predict(&x[i]), y[i]);
        }
    }

    #[test]
    fn identical_points_with_different_labels_make_a_leaf() {
        let x = vec![vec![1.0, 1.0]; 3];
        let y = vec![1, 0, 1];
        let t = grow_tree(&x, &y, &[0, 1, 2], &params(2, 1), &mut seeded(0));
        assert_eq!(t.nodes, vec![Node::Leaf { class: 1 }]);
    }

    #[test]
    fn falls_back_to_unsampled_features() {
        // feature 0 is constant, only feature 1 separates; with one feature
        // per split the tree must still find it.
        let x = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![0.0, 2.0], vec![0.0, 3.0]];
        let y = vec![0, 0, 1, 1];
        for seed in 0..10 {
            let t = grow_tree(&x, &y, &[0, 1, 2, 3], &params(2, 1), &mut seeded(seed));
            assert_eq!(t.split_features(), vec![1]);
        }
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[5, 0], 5), 0.0);
        assert_eq!(gini(&[5, 5], 10), 0.5);
    }
}
