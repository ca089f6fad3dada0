//! AdaBoost.R2 over depth-limited CART regression trees.

use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// Squared-error regression tree.
#[derive(Debug, Clone)]
pub struct RegressionTree {
    root: Node,
}

impl RegressionTree {
    /// Fits on the rows listed in `sample` (repeats allowed). `x` is row-major
    /// with `n_cols` columns.
    pub fn fit(x: &[f64], n_cols: usize, y: &[f64], sample: &[usize], max_depth: usize) -> Self {
        RegressionTree {
            root: grow(x, n_cols, y, sample.to_vec(), max_depth),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }
}

fn grow(x: &[f64], n_cols: usize, y: &[f64], idx: Vec<usize>, depth: usize) -> Node {
    let n = idx.len() as f64;
    let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / n;
    if depth == 0 || idx.len() < 2 || idx.iter().all(|&i| y[i] == y[idx[0]]) {
        return Node::Leaf(mean);
    }
    let total_sq: f64 = idx.iter().map(|&i| y[i] * y[i]).sum();
    let total: f64 = mean * n;
    let parent_sse = total_sq - total * total / n;

    // best = (sse, feature, threshold)
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = idx.clone();
    for f in 0..n_cols {
        let val = |i: usize| x[i * n_cols + f];
        order.sort_by(|&a, &b| val(a).total_cmp(&val(b)).then(a.cmp(&b)));
        let (mut ls, mut lsq) = (0.0, 0.0);
        for k in 0..order.len() - 1 {
            let yi = y[order[k]];
            ls += yi;
            lsq += yi * yi;
            let (v, next) = (val(order[k]), val(order[k + 1]));
            if v == next {
                continue;
            }
            let nl = (k + 1) as f64;
            let nr = n - nl;
            let (rs, rsq) = (total - ls, total_sq - lsq);
            let sse = (lsq - ls * ls / nl) + (rsq - rs * rs / nr);
            if best.is_none_or(|b| sse < b.0) {
                best = Some((sse, f, v + (next - v) / 2.0));
            }
        }
    }
    match best {
        Some((sse, feature, threshold)) if sse < parent_sse - 1e-12 * parent_sse.abs().max(1.0) => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| x[i * n_cols + feature] <= threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow(x, n_cols, y, l, depth - 1)),
                right: Box::new(grow(x, n_cols, y, r, depth - 1)),
            }
        }
        _ => Node::Leaf(mean),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaBoostConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig {
            rounds: 50,
            max_depth: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdaBoostModel {
    trees: Vec<RegressionTree>,
    weights: Vec<f64>,
    /// Weighted average loss of each kept round.
    pub round_losses: Vec<f64>,
    /// Sum of the updated sample weights before renormalizing, per round.
    normalizers: Vec<f64>,
}

impl AdaBoostModel {
    pub fn n_rounds(&self) -> usize {
        self.trees.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_with(row, self.trees.len())
    }

    /// Running product of the per-round weight normalizers: the boosting
    /// loss bound on the training set after each reweighting round. Each
    /// factor is at most 1 when that round's average loss is below 0.5.
    pub fn training_loss(&self) -> Vec<f64> {
        self.normalizers
            .iter()
            .scan(1.0, |acc, z| {
                *acc *= z;
                Some(*acc)
            })
            .collect()
    }

    /// Prediction of the first `rounds` learners: weighted median of their outputs.
    pub fn predict_with(&self, row: &[f64], rounds: usize) -> f64 {
        let mut preds: Vec<(f64, f64)> = self.trees[..rounds]
            .iter()
            .zip(&self.weights)
            .map(|(t, &w)| (t.predict_row(row), w))
            .collect();
        preds.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = preds.iter().map(|p| p.1).sum();
        let mut acc = 0.0;
        for &(p, w) in &preds {
            acc += w;
            if acc >= 0.5 * total {
                return p;
            }
        }
        preds.last().map_or(0.0, |p| p.0)
    }
}

/// Drucker's AdaBoost.R2 with the linear loss. Each round fits a tree on a
/// bootstrap sample drawn with the current weights; boosting stops early on
/// a perfect round or once the average loss reaches 0.5.
pub fn fit_adaboost_r2(x: &[f64], n_cols: usize, y: &[f64], config: &AdaBoostConfig) -> Result<AdaBoostModel> {
    let n = y.len();
    if config.rounds == 0 {
        return Err(Error::invalid("rounds must be at least 1"));
    }
    if n == 0 || x.len() != n * n_cols {
        return Err(Error::invalid(format!("{} targets for {} feature values", n, x.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w = vec![1.0 / n as f64; n];
    let mut model = AdaBoostModel {
        trees: Vec::new(),
        weights: Vec::new(),
        round_losses: Vec::new(),
        normalizers: Vec::new(),
    };
    for _ in 0..config.rounds {
        let dist = WeightedIndex::new(&w).map_err(|e| Error::invalid(e.to_string()))?;
        let sample: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let tree = RegressionTree::fit(x, n_cols, y, &sample, config.max_depth);
        let err: Vec<f64> = (0..n)
            .map(|i| (tree.predict_row(&x[i * n_cols..(i + 1) * n_cols]) - y[i]).abs())
            .collect();
        let max_err = err.iter().copied().fold(0.0, f64::max);
        if max_err == 0.0 {
            model.trees.push(tree);
            model.weights.push(1.0);
            model.round_losses.push(0.0);
            break;
        }
        let loss: Vec<f64> = err.iter().map(|e| e / max_err).collect();
        let avg: f64 = loss.iter().zip(&w).map(|(l, wi)| l * wi).sum();
        if avg >= 0.5 {
            if model.trees.is_empty() {
                model.trees.push(tree);
                model.weights.push(1.0);
                model.round_losses.push(avg);
            }
            break;
        }
        let beta = avg / (1.0 - avg);
        model.trees.push(tree);
        model.weights.push((1.0 / beta).ln());
        model.round_losses.push(avg);
        for (wi, l) in w.iter_mut().zip(&loss) {
            *wi *= beta.powf(1.0 - l);
        }
        let sum: f64 = w.iter().sum();
        model.normalizers.push(sum);
        if !(sum > 0.0) {
            break;
        }
        w.iter_mut().for_each(|wi| *wi /= sum);
    }
    Ok(model)
}
