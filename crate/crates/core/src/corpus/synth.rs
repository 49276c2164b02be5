use std::io::Write;
use std::path::Path;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CorpusWriter, Document, DomainTag, ScoreMap, TokenEstimator};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::presets::SLIMPAJAMA_DOMAIN_PERCENT;
use crate::scores::{CANONICAL_SCORE_NAMES, PRRC_RATERS};

/// One synthetic score column: `mean + std * (loading * z[factor] + sqrt(1 - loading^2) * eps)`,
/// optionally clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreLatent {
    pub name: String,
    #[serde(default)]
    pub mean: f64,
    #[serde(default = "one")]
    pub std: f64,
    #[serde(default)]
    pub factor: usize,
    #[serde(default)]
    pub loading: f64,
    #[serde(default)]
    pub clamp: Option<[f64; 2]>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisSpec {
    pub documents: usize,
    /// Domain name to proportion, in declaration order.
    pub domain_mix: IndexMap<String, f64>,
    pub min_words: usize,
    pub max_words: usize,
    pub vocabulary: usize,
    pub scores: Vec<ScoreLatent>,
    pub id_prefix: String,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        SynthesisSpec {
            documents: 1000,
            domain_mix: SLIMPAJAMA_DOMAIN_PERCENT
                .iter()
                .map(|(n, p)| (n.to_string(), p / 100.0))
                .collect(),
            min_words: 40,
            max_words: 400,
            vocabulary: 2000,
            scores: default_latents(),
            id_prefix: "doc".into(),
        }
    }
}

/// All 25 canonical scores: a general quality factor drives the model
/// ratings, a shared factor drives the three importance scores.
fn default_latents() -> Vec<ScoreLatent> {
    CANONICAL_SCORE_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let (mean, std, factor, loading, clamp) = match i {
                0..=10 => (0.5, 0.15, 2, 0.3, Some([0.0, 1.0])),
                11..=13 => (0.0, 20.0, 1, 0.99, None),
                _ if PRRC_RATERS.contains(name) => (2.5, 1.0, 0, 0.7, Some([0.0, 5.0])),
                _ => (1.5, 0.8, 0, 0.6, None),
            };
            ScoreLatent {
                name: name.to_string(),
                mean,
                std,
                factor,
                loading,
                clamp,
            }
        })
        .collect()
}

impl SynthesisSpec {
    fn validate(&self) -> Result<()> {
        if self.domain_mix.is_empty() {
            return Err(Error::invalid("domain mix is empty"));
        }
        if self.min_words > self.max_words {
            return Err(Error::invalid("min_words exceeds max_words"));
        }
        if self.vocabulary == 0 {
            return Err(Error::invalid("vocabulary must be positive"));
        }
        for s in &self.scores {
            if !(s.loading.abs() <= 1.0) || !(s.std >= 0.0) || !s.mean.is_finite() {
                return Err(Error::invalid(format!("score latent `{}` is malformed", s.name)));
            }
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `total` items over `proportions`.
/// Equal remainders (to 1e-9) go to the earlier entry.
pub fn apportion(total: usize, proportions: &[f64]) -> Result<Vec<usize>> {
    if proportions.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::invalid("proportions must be nonnegative"));
    }
    let sum: f64 = proportions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("proportions sum to {sum}, not 1")));
    }
    let quotas: Vec<f64> = proportions.iter().map(|p| p * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..proportions.len()).collect();
    let key = |i: usize| ((quotas[i] - quotas[i].floor()) * 1e9).round() as i64;
    order.sort_by(|&a, &b| key(b).cmp(&key(a)).then(a.cmp(&b)));
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    Ok(counts)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "ne", "ru", "ta", "shi", "po", "ve", "de", "qua", "zor", "ben", "tal", "um", "ix",
];

fn vocab_word(mut k: usize) -> String {
    let mut w = String::new();
    loop {
        w.push_str(SYLLABLES[k % SYLLABLES.len()]);
        k /= SYLLABLES.len();
        if k == 0 {
            break;
        }
    }
    w
}

fn synth_text(rng: &mut ChaCha8Rng, spec: &SynthesisSpec, vocab: &[String]) -> String {
    let words = rng.random_range(spec.min_words..=spec.max_words);
    let mut text = String::with_capacity(words * 6);
    let mut in_sentence = 0usize;
    let mut sentence_len = rng.random_range(5..16);
    for i in 0..words {
        if i > 0 {
            text.push(if in_sentence == 0 && rng.random_bool(0.2) { '\n' } else { ' ' });
        }
        if rng.random_bool(0.03) {
            text.push_str(&rng.random_range(0..10_000u32).to_string());
        } else {
            let u: f64 = rng.random();
            let word = &vocab[((u.powf(2.5) * vocab.len() as f64) as usize).min(vocab.len() - 1)];
            if in_sentence == 0 {
                let mut chars = word.chars();
                if let Some(c) = chars.next() {
                    text.extend(c.to_uppercase());
                    text.push_str(chars.as_str());
                }
            } else {
                text.push_str(word);
            }
        }
        in_sentence += 1;
        if in_sentence == sentence_len || i + 1 == words {
            text.push(match rng.random_range(0..10) {
                0 => '!',
                1 => '?',
                _ => '.',
            });
            in_sentence = 0;
            sentence_len = rng.random_range(5..16);
        }
    }
    text
}

/// Deterministic synthetic corpus: exact per-domain counts (largest
/// remainder), shuffled order, text from a pseudo-word vocabulary and scores
/// drawn from the declared latent model.
pub fn synthesize_corpus(spec: &SynthesisSpec, seed: u64) -> Result<Vec<Document>> {
    spec.validate()?;
    let proportions: Vec<f64> = spec.domain_mix.values().copied().collect();
    let counts = apportion(spec.documents, &proportions)?;
    let mut domains: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(d, &c)| std::iter::repeat_n(d, c))
        .collect();
    let mut rng = stream_rng(seed, 0);
    for i in (1..domains.len()).rev() {
        let j = rng.random_range(0..=i);
        domains.swap(i, j);
    }
    let tags: Vec<DomainTag> = spec.domain_mix.keys().map(DomainTag::new).collect();
    let vocab: Vec<String> = (0..spec.vocabulary).map(vocab_word).collect();
    let factors = spec.scores.iter().map(|s| s.factor + 1).max().unwrap_or(0);
    let width = spec.documents.max(1).to_string().len().max(6);

    Ok(Execution::default().map_range(spec.documents, |i| {
        let mut rng = stream_rng(seed, i as u64 + 1);
        let text = synth_text(&mut rng, spec, &vocab);
        let mut doc = Document::new(
            format!("{}-{:0width$}", spec.id_prefix, i),
            text,
            tags[domains[i]].clone(),
            &TokenEstimator::Whitespace,
        );
        if !spec.scores.is_empty() {
            let z: Vec<f64> = (0..factors).map(|_| rng.sample(StandardNormal)).collect();
            let mut scores = ScoreMap::with_capacity(spec.scores.len());
            for s in &spec.scores {
                let eps: f64 = rng.sample(StandardNormal);
                let idio = (1.0 - s.loading * s.loading).max(0.0).sqrt();
                let mut v = s.mean + s.std * (s.loading * z[s.factor] + idio * eps);
                if let Some([lo, hi]) = s.clamp {
                    v = v.clamp(lo, hi);
                }
                scores.insert(s.name.clone(), v);
            }
            doc.scores = Some(scores);
        }
        doc
    }))
}

pub fn synthesize_to_file(spec: &SynthesisSpec, seed: u64, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let docs = synthesize_corpus(spec, seed)?;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = CorpusWriter::new(std::io::BufWriter::new(file));
    for d in &docs {
        w.write(d).map_err(|e| Error::io(path, e))?;
    }
    w.finish()
        .and_then(|mut f| f.flush())
        .map_err(|e| Error::io(path, e))?;
    Ok(docs.len())
}
