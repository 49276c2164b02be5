use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::selection::WeightVector;

/// Point `index` of the seeded Dirichlet(concentration, …) stream over the
/// `m`-simplex. Each index has its own ChaCha stream, so points can be
/// generated in any order.
pub fn dirichlet_point(seed: u64, index: u64, m: usize, concentration: f64) -> Vec<f64> {
    if m == 1 {
        return vec![1.0];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut draws: Vec<f64> = (0..m).map(|_| rng.sample(gamma)).collect();
    let sum: f64 = draws.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        draws.iter_mut().for_each(|d| *d /= sum);
    } else {
        draws.fill(1.0 / m as f64);
    }
    draws
}

/// `n` points from the flat Dirichlet over the `m`-simplex.
pub fn sample_simplex(m: usize, n: usize, seed: u64, concentration: f64, exec: Execution) -> Result<Vec<Vec<f64>>> {
    if m == 0 {
        return Err(Error::invalid("simplex dimension must be at least 1"));
    }
    if !(concentration > 0.0) || !concentration.is_finite() {
        return Err(Error::invalid("Dirichlet concentration must be positive"));
    }
    Ok(exec.map_range(n, |i| dirichlet_point(seed, i as u64, m, concentration)))
}

/// `n` flat-Dirichlet weight vectors over `names`.
pub fn sample_weights<S: AsRef<str> + Sync>(names: &[S], n: usize, seed: u64) -> Result<Vec<WeightVector>> {
    sample_simplex(names.len(), n, seed, 1.0, Execution::default())?
        .into_iter()
        .map(|p| WeightVector::from_coordinates(names, &p))
        .collect()
}
