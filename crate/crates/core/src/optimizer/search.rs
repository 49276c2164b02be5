//! Random search over the weight simplex against a fitted regressor.

use serde::{Deserialize, Serialize};

use super::gbrt::Regressor;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::proxy::dirichlet_point;
use crate::selection::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub candidates: usize,
    pub top_k: usize,
    pub seed: u64,
    pub concentration: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            candidates: 100_000,
            top_k: 100,
            seed: 0,
            concentration: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub weights: Vec<f64>,
    pub predicted_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub names: Vec<String>,
    pub w_star: WeightVector,
    /// Lowest predicted losses first; ties by candidate index.
    pub top_k: Vec<Candidate>,
    pub predicted_loss_at_star: f64,
    pub mean_predicted_loss: f64,
}

/// Scores `candidates` seeded Dirichlet points and averages the `top_k`
/// with the lowest predicted loss.
pub fn search_optimal(model: &dyn Regressor, config: &SearchConfig, exec: Execution) -> Result<SearchOutcome> {
    let names = model.names().to_vec();
    let m = names.len();
    if m == 0 {
        return Err(Error::invalid("model has no input features"));
    }
    if config.candidates == 0 || config.top_k == 0 || config.top_k > config.candidates {
        return Err(Error::invalid(format!(
            "need 1 <= top_k ({}) <= candidates ({})",
            config.top_k, config.candidates
        )));
    }
    if !(config.concentration > 0.0) || !config.concentration.is_finite() {
        return Err(Error::invalid("Dirichlet concentration must be positive"));
    }
    let point = |i: usize| dirichlet_point(config.seed, i as u64, m, config.concentration);

    let predicted = exec.map_range(config.candidates, |i| model.predict(&point(i)));
    let mean_predicted_loss = predicted.iter().sum::<f64>() / predicted.len() as f64;

    let mut order: Vec<usize> = (0..predicted.len()).collect();
    let by_loss = |a: &usize, b: &usize| predicted[*a].total_cmp(&predicted[*b]).then(a.cmp(b));
    if config.top_k < order.len() {
        order.select_nth_unstable_by(config.top_k - 1, by_loss);
        order.truncate(config.top_k);
    }
    order.sort_by(by_loss);
    let top_k: Vec<Candidate> = order
        .into_iter()
        .map(|i| Candidate {
            index: i,
            weights: point(i),
            predicted_loss: predicted[i],
        })
        .collect();

    let mut star = vec![0.0; m];
    for c in &top_k {
        for (s, w) in star.iter_mut().zip(&c.weights) {
            *s += w;
        }
    }
    let k = top_k.len() as f64;
    star.iter_mut().for_each(|s| *s /= k);
    let sum: f64 = star.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        star.iter_mut().for_each(|s| *s /= sum);
    }
    let predicted_loss_at_star = model.predict(&star);
    Ok(SearchOutcome {
        w_star: WeightVector::from_coordinates(&names, &star)?,
        names,
        top_k,
        predicted_loss_at_star,
        mean_predicted_loss,
    })
}
