//! Gradient-boosted regression trees for squared error.
//!
//! Each round fits a depth-limited tree to the current residuals on a
//! seeded row subsample and adds it with shrinkage. Splits are exact: every
//! feature is sorted and every boundary between distinct values is scored.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proxy::ExperimentRecord;

/// Minimum number of successful experiments needed to fit.
pub const MIN_RECORDS: usize = 16;

/// A fitted map from a weight vector (in `names` order) to predicted loss.
pub trait Regressor: Sync {
    fn names(&self) -> &[String];
    fn predict(&self, features: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressorHyper {
    pub trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for RegressorHyper {
    fn default() -> Self {
        RegressorHyper {
            trees: 100,
            max_depth: 4,
            learning_rate: 0.05,
            subsample: 0.8,
            min_samples_leaf: 5,
            seed: 0,
        }
    }
}

impl RegressorHyper {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::invalid("learning rate must be in (0, 1]"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::invalid("subsample must be in (0, 1]"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::invalid("min_samples_leaf must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub seed: u64,
    pub samples: usize,
    pub in_sample_mse: f64,
    /// All targets were equal; the model is that constant.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right } as usize,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    names: Vec<String>,
    base: f64,
    learning_rate: f64,
    trees: Vec<Tree>,
    pub metadata: FitMetadata,
}

impl Regressor for BoostedTrees {
    fn names(&self) -> &[String] {
        &self.names
    }

    fn predict(&self, x: &[f64]) -> f64 {
        self.base + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    residual: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf_value(&self, rows: &[usize]) -> f64 {
        rows.iter().map(|&r| self.residual[r]).sum::<f64>() / rows.len() as f64
    }

    /// Best `(gain, feature, threshold)` over all features.
    fn best_split(&self, rows: &[usize]) -> Option<(f64, usize, f64)> {
        let n = rows.len();
        if n < 2 * self.min_leaf {
            return None;
        }
        let total: f64 = rows.iter().map(|&r| self.residual[r]).sum();
        let parent = total * total / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for f in 0..self.x[0].len() {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                left_sum += self.residual[sorted[i]];
                let (lo, hi) = (self.x[sorted[i]][f], self.x[sorted[i + 1]][f]);
                let n_left = i + 1;
                if lo == hi || n_left < self.min_leaf || n - n_left < self.min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64 - parent;
                if gain > best.map_or(1e-15, |b| b.0) {
                    best = Some((gain, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best
    }

    fn build(&mut self, rows: &[usize], depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let split = if depth < self.max_depth { self.best_split(rows) } else { None };
        match split {
            None => self.nodes.push(Node::Leaf(self.leaf_value(rows))),
            Some((_, feature, threshold)) => {
                self.nodes.push(Node::Leaf(0.0));
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&row| self.x[row][feature] <= threshold);
                let left = self.build(&l, depth + 1);
                let right = self.build(&r, depth + 1);
                self.nodes[id as usize] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        id
    }
}

/// Fits on raw `(features, target)` rows. Rows are put in a canonical
/// order first, so the model does not depend on input order.
pub fn fit_boosted_trees(
    features: &[Vec<f64>],
    targets: &[f64],
    names: Vec<String>,
    hyper: &RegressorHyper,
) -> Result<BoostedTrees> {
    hyper.validate()?;
    if features.len() != targets.len() || features.is_empty() {
        return Err(Error::invalid("features and targets must be nonempty and aligned"));
    }
    let m = names.len();
    if features.iter().any(|f| f.len() != m) {
        return Err(Error::invalid("feature rows must match the name list"));
    }
    if targets.iter().any(|t| !t.is_finite()) || features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("features and targets must be finite"));
    }

    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| {
        features[a]
            .iter()
            .zip(&features[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(targets[a].total_cmp(&targets[b]))
    });
    let x: Vec<Vec<f64>> = order.iter().map(|&i| features[i].clone()).collect();
    let y: Vec<f64> = order.iter().map(|&i| targets[i]).collect();
    let n = y.len();

    let base = y.iter().sum::<f64>() / n as f64;
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut metadata = FitMetadata {
        trees: 0,
        max_depth: hyper.max_depth,
        learning_rate: hyper.learning_rate,
        subsample: hyper.subsample,
        seed: hyper.seed,
        samples: n,
        in_sample_mse: 0.0,
        degenerate: false,
    };
    if hi == lo {
        log::warn!("all {n} targets equal {lo}; fitting a constant model");
        metadata.degenerate = true;
        return Ok(BoostedTrees {
            names,
            base: lo,
            learning_rate: hyper.learning_rate,
            trees: Vec::new(),
            metadata,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut prediction = vec![base; n];
    let mut residual = vec![0.0; n];
    let take = ((n as f64 * hyper.subsample).round() as usize).clamp(1, n);
    let mut trees = Vec::with_capacity(hyper.trees);
    for _ in 0..hyper.trees {
        for i in 0..n {
            residual[i] = y[i] - prediction[i];
        }
        let mut rows: Vec<usize> = if take == n {
            (0..n).collect()
        } else {
            sample(&mut rng, n, take).into_vec()
        };
        rows.sort_unstable();
        let mut builder = Builder {
            x: &x,
            residual: &residual,
            max_depth: hyper.max_depth,
            min_leaf: hyper.min_samples_leaf,
            nodes: Vec::new(),
        };
        builder.build(&rows, 0);
        let tree = Tree { nodes: builder.nodes };
        for i in 0..n {
            prediction[i] += hyper.learning_rate * tree.predict(&x[i]);
        }
        trees.push(tree);
    }
    metadata.trees = trees.len();
    metadata.in_sample_mse = y.iter().zip(&prediction).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64;
    Ok(BoostedTrees {
        names,
        base,
        learning_rate: hyper.learning_rate,
        trees,
        metadata,
    })
}

/// Fits on the successful records of a campaign. Weight coordinates are
/// aligned by name to the first record.
pub fn fit_regressor(records: &[ExperimentRecord], hyper: &RegressorHyper) -> Result<BoostedTrees> {
    let ok: Vec<&ExperimentRecord> = records.iter().filter(|r| r.is_ok()).collect();
    if ok.len() < MIN_RECORDS {
        return Err(Error::invalid(format!(
            "need at least {MIN_RECORDS} successful experiments, got {}",
            ok.len()
        )));
    }
    let names: Vec<String> = ok[0].weights.names().to_vec();
    let mut features = Vec::with_capacity(ok.len());
    for r in &ok {
        if r.weights.len() != names.len() {
            return Err(Error::invalid(format!("{} ranges over different scores", r.experiment_id)));
        }
        let row = names
            .iter()
            .map(|n| {
                r.weights
                    .get(n)
                    .ok_or_else(|| Error::invalid(format!("{} lacks weight `{n}`", r.experiment_id)))
            })
            .collect::<Result<Vec<f64>>>()?;
        features.push(row);
    }
    let targets: Vec<f64> = ok.iter().map(|r| r.loss.expect("ok record")).collect();
    fit_boosted_trees(&features, &targets, names, hyper)
}
