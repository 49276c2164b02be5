//! Hashed `{1,2}`-wordgram bag models and log-ratio importance scores.
//!
//! A feature is a unigram `w` or a bigram `w1␟w2` over the normalized word
//! stream. Features are hashed with seeded XXH3-64 and reduced modulo the
//! bucket count. Bucket probabilities use additive smoothing, so every
//! log-ratio is finite.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::signals::{normalize, words};

pub const BOOKS_IMPORTANCE: &str = "books_importance";
pub const WIKIPEDIA_IMPORTANCE: &str = "wikipedia_importance";
pub const MATH_IMPORTANCE: &str = "math_importance";

pub const IMPORTANCE_NAMES: [&str; 3] = [BOOKS_IMPORTANCE, WIKIPEDIA_IMPORTANCE, MATH_IMPORTANCE];

/// Separator between the two words of a bigram feature (U+241F).
pub const BIGRAM_SEPARATOR: char = '\u{241F}';

pub const DEFAULT_BUCKETS: usize = 65_536;

/// Unigram and bigram features of a text, in document order.
pub fn features(text: &str) -> Vec<String> {
    let normalized = normalize(text);
    let ws = words(&normalized);
    let mut out = Vec::with_capacity(ws.len() * 2);
    for (i, w) in ws.iter().enumerate() {
        out.push((*w).to_string());
        if i + 1 < ws.len() {
            out.push(format!("{w}{BIGRAM_SEPARATOR}{}", ws[i + 1]));
        }
    }
    out
}

#[inline]
pub fn bucket_of(feature: &str, seed: u64, bucket_count: usize) -> usize {
    (xxh3_64_with_seed(feature.as_bytes(), seed) % bucket_count as u64) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BagConfig {
    pub bucket_count: usize,
    pub seed: u64,
    pub smoothing: f64,
}

impl Default for BagConfig {
    fn default() -> Self {
        BagConfig {
            bucket_count: DEFAULT_BUCKETS,
            seed: 0,
            smoothing: 1.0,
        }
    }
}

/// Bucketed feature counts with additive smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashedBagModel {
    pub bucket_count: usize,
    pub seed: u64,
    pub smoothing: f64,
    pub counts: Vec<u64>,
    #[serde(skip)]
    total: u64,
}

impl HashedBagModel {
    pub fn empty(config: BagConfig) -> Result<Self> {
        if config.bucket_count < 2 {
            return Err(Error::invalid("bucket_count must be at least 2"));
        }
        if !(config.smoothing > 0.0) || !config.smoothing.is_finite() {
            return Err(Error::invalid("smoothing must be positive"));
        }
        Ok(HashedBagModel {
            bucket_count: config.bucket_count,
            seed: config.seed,
            smoothing: config.smoothing,
            counts: vec![0; config.bucket_count],
            total: 0,
        })
    }

    pub fn config(&self) -> BagConfig {
        BagConfig {
            bucket_count: self.bucket_count,
            seed: self.seed,
            smoothing: self.smoothing,
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn add_text(&mut self, text: &str) {
        for f in features(text) {
            self.counts[bucket_of(&f, self.seed, self.bucket_count)] += 1;
            self.total += 1;
        }
    }

    fn merge(mut self, other: &HashedBagModel) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self
    }

    /// Smoothed probability of a bucket.
    pub fn probability(&self, bucket: usize) -> f64 {
        (self.counts[bucket] as f64 + self.smoothing)
            / (self.total as f64 + self.smoothing * self.bucket_count as f64)
    }

    pub fn log_probability(&self, bucket: usize) -> f64 {
        self.probability(bucket).ln()
    }

    fn check_compatible(&self, other: &HashedBagModel) -> Result<()> {
        if self.bucket_count != other.bucket_count {
            return Err(Error::ModelMismatch(format!(
                "bucket counts {} and {}",
                self.bucket_count, other.bucket_count
            )));
        }
        if self.seed != other.seed {
            return Err(Error::ModelMismatch(format!(
                "hash seeds {} and {}",
                self.seed, other.seed
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_vec(self)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut model: HashedBagModel = serde_json::from_slice(&bytes)?;
        if model.counts.len() != model.bucket_count {
            return Err(Error::invalid(format!(
                "model has {} counts for {} buckets",
                model.counts.len(),
                model.bucket_count
            )));
        }
        HashedBagModel::empty(model.config())?;
        model.total = model.counts.iter().sum();
        Ok(model)
    }
}

/// Fits a bag model over `texts`. Shards accumulate locally and are merged
/// once.
pub fn fit_bag_model<S: AsRef<str> + Sync>(
    texts: &[S],
    config: BagConfig,
    exec: Execution,
) -> Result<HashedBagModel> {
    let base = HashedBagModel::empty(config)?;
    if texts.is_empty() {
        return Err(Error::invalid("cannot fit a bag model on an empty corpus"));
    }
    let shard = texts.len().div_ceil(16).max(64);
    Ok(exec.fold_chunks(
        texts,
        shard,
        || base.clone(),
        |mut model, text| {
            model.add_text(text.as_ref());
            model
        },
        |a, b| a.merge(&b),
    ))
}

/// Per-bucket `ln p̂ − ln q̂` for scoring many documents against one pair.
#[derive(Debug, Clone)]
pub struct ImportanceScorer {
    seed: u64,
    log_ratio: Vec<f64>,
}

impl ImportanceScorer {
    pub fn new(target: &HashedBagModel, source: &HashedBagModel) -> Result<Self> {
        target.check_compatible(source)?;
        let log_ratio = (0..target.bucket_count)
            .map(|b| target.log_probability(b) - source.log_probability(b))
            .collect();
        Ok(ImportanceScorer {
            seed: target.seed,
            log_ratio,
        })
    }

    /// Sum of per-feature log-ratios, in nats.
    pub fn score_features<I, S>(&self, features: I) -> f64
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let buckets = self.log_ratio.len();
        features
            .into_iter()
            .map(|f| self.log_ratio[bucket_of(f.as_ref(), self.seed, buckets)])
            .sum()
    }

    pub fn score(&self, text: &str) -> f64 {
        self.score_features(features(text))
    }

    pub fn score_batch<S: AsRef<str> + Sync>(&self, texts: &[S], exec: Execution) -> Vec<f64> {
        exec.map(texts, |t| self.score(t.as_ref()))
    }
}

/// `log p(doc) − log q(doc)` under two compatible bag models.
pub fn importance_score(text: &str, target: &HashedBagModel, source: &HashedBagModel) -> Result<f64> {
    Ok(ImportanceScorer::new(target, source)?.score(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(bucket_count: usize) -> BagConfig {
        BagConfig {
            bucket_count,
            seed: 7,
            smoothing: 1.0,
        }
    }

    #[test]
    fn feature_enumeration() {
        assert_eq!(features("a b"), vec!["a".to_string(), "a\u{241F}b".into(), "b".into()]);
        let m = fit_bag_model(&["a b"], config(1024), Execution::Sequential).unwrap();
        assert_eq!(m.total(), 3);
    }

    #[test]
    fn counts_are_additive() {
        let one = fit_bag_model(&["the cat sat"], config(256), Execution::Sequential).unwrap();
        let two = fit_bag_model(&["the cat sat", "the cat sat"], config(256), Execution::Parallel).unwrap();
        for (a, b) in one.counts.iter().zip(&two.counts) {
            assert_eq!(2 * a, *b);
        }
    }

    #[test]
    fn errors() {
        let empty: [&str; 0] = [];
        assert!(fit_bag_model(&empty, config(16), Execution::Sequential).is_err());
        assert!(fit_bag_model(&["a"], config(1), Execution::Sequential).is_err());
        let p = fit_bag_model(&["a"], config(16), Execution::Sequential).unwrap();
        let q = fit_bag_model(&["a"], config(32), Execution::Sequential).unwrap();
        assert!(matches!(importance_score("a", &p, &q), Err(Error::ModelMismatch(_))));
        let mut other_seed = config(16);
        other_seed.seed = 8;
        let q = fit_bag_model(&["a"], other_seed, Execution::Sequential).unwrap();
        assert!(matches!(importance_score("a", &p, &q), Err(Error::ModelMismatch(_))));
    }

    #[test]
    fn identical_models_score_zero() {
        let p = fit_bag_model(&["one two three", "two three four"], config(64), Execution::Sequential).unwrap();
        assert_eq!(importance_score("one four five", &p, &p).unwrap(), 0.0);
        assert_eq!(importance_score("", &p, &p).unwrap(), 0.0);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let p = fit_bag_model(&["x y z x", "q r"], config(97), Execution::Sequential).unwrap();
        let total: f64 = (0..p.bucket_count).map(|b| p.probability(b)).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!((0..p.bucket_count).all(|b| p.probability(b) > 0.0 && p.probability(b) < 1.0));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let p = fit_bag_model(&["x y z x", "q r"], config(97), Execution::Sequential).unwrap();
        p.save(&path).unwrap();
        let back = HashedBagModel::load(&path).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.total(), p.total());
    }
}
