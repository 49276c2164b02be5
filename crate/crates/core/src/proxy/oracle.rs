//! Synthetic stand-ins for proxy training, with known optima.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::{Error, Result};
use crate::scores::ScoreMatrix;
use crate::selection::{SelectionResult, WeightVector};

fn noise(seed: u64, key: u64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ key);
    let z: f64 = StandardNormal.sample(&mut rng);
    sigma * z
}

/// `base + ‖w − optimum‖² + N(0, sigma²)`. The noise draw is keyed by the
/// weight vector, so the loss is a pure function of `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticOracle {
    pub optimum: WeightVector,
    #[serde(default)]
    pub base: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl QuadraticOracle {
    pub fn new(optimum: WeightVector, base: f64, sigma: f64, seed: u64) -> Self {
        QuadraticOracle {
            optimum,
            base,
            sigma,
            seed,
        }
    }

    pub fn loss(&self, w: &WeightVector) -> f64 {
        oracle_loss(w, self)
    }
}

pub fn oracle_loss(w: &WeightVector, oracle: &QuadraticOracle) -> f64 {
    let mut sq: f64 = w
        .iter()
        .map(|(n, x)| (x - oracle.optimum.get(n).unwrap_or(0.0)).powi(2))
        .sum();
    sq += oracle
        .optimum
        .iter()
        .filter(|(n, _)| w.get(n).is_none())
        .map(|(_, x)| x * x)
        .sum::<f64>();
    let bits: Vec<u8> = w.weights().iter().flat_map(|x| x.to_bits().to_le_bytes()).collect();
    oracle.base + sq + noise(oracle.seed, xxh3_64_with_seed(&bits, 0x5eed), oracle.sigma)
}

/// Loss driven by the selected documents: `base − mean utility`, where a
/// document's utility is a fixed linear combination of some normalized
/// score columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetOracle {
    utility: Vec<f64>,
    pub base: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl SubsetOracle {
    pub fn from_matrix(
        matrix: &ScoreMatrix,
        drivers: &[(String, f64)],
        base: f64,
        sigma: f64,
        seed: u64,
    ) -> Result<Self> {
        if !matrix.is_normalized() {
            return Err(Error::invalid("score matrix is not normalized"));
        }
        let cols: Vec<(usize, f64)> = drivers
            .iter()
            .map(|(n, c)| matrix.column_index(n).map(|i| (i, *c)).ok_or_else(|| Error::UnknownScore(n.clone())))
            .collect::<Result<_>>()?;
        let utility = (0..matrix.rows())
            .map(|r| {
                let row = matrix.normalized_row(r).expect("normalized");
                cols.iter().map(|&(c, k)| k * row[c]).sum()
            })
            .collect();
        Ok(SubsetOracle {
            utility,
            base,
            sigma,
            seed,
        })
    }

    pub fn utility(&self, row: usize) -> f64 {
        self.utility[row]
    }

    pub fn loss(&self, selection: &SelectionResult) -> Result<f64> {
        if selection.rows.is_empty() {
            return Err(Error::Trainer("empty selection".into()));
        }
        let mut total = 0.0;
        for &r in &selection.rows {
            total += *self
                .utility
                .get(r)
                .ok_or_else(|| Error::Trainer(format!("row {r} outside the oracle corpus")))?;
        }
        let mean = total / selection.rows.len() as f64;
        let bits: Vec<u8> = selection.rows.iter().flat_map(|r| (*r as u64).to_le_bytes()).collect();
        Ok(self.base - mean + noise(self.seed, xxh3_64_with_seed(&bits, 0x5eed), self.sigma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimum() -> WeightVector {
        WeightVector::new([("a", 0.2), ("b", 0.3), ("c", 0.5)]).unwrap()
    }

    #[test]
    fn minimum_is_base() {
        let o = QuadraticOracle::new(optimum(), 2.5, 0.0, 1);
        assert_eq!(o.loss(&optimum()), 2.5);
    }

    #[test]
    fn increases_along_rays() {
        let o = QuadraticOracle::new(optimum(), 1.0, 0.0, 1);
        let target = [0.0, 0.0, 1.0];
        let mut prev = o.loss(&optimum());
        for step in 1..=10 {
            let t = step as f64 / 10.0;
            let p: Vec<f64> = [0.2, 0.3, 0.5]
                .iter()
                .zip(target)
                .map(|(a, b)| a + t * (b - a))
                .collect();
            let w = WeightVector::from_coordinates(&["a", "b", "c"], &p).unwrap();
            let l = o.loss(&w);
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn noise_is_seeded() {
        let o = QuadraticOracle::new(optimum(), 1.0, 0.1, 99);
        let w = WeightVector::uniform(&["a", "b", "c"]).unwrap();
        assert_eq!(o.loss(&w), o.loss(&w));
        assert_ne!(o.loss(&w), QuadraticOracle::new(optimum(), 1.0, 0.1, 100).loss(&w));
    }
}
