//! Corpus records, line-delimited JSON reading/writing, and a seeded
//! synthetic corpus generator.

mod reader;
mod synth;

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::presets::SLIMPAJAMA_DOMAIN_PERCENT;

pub use reader::{load_corpora, load_corpus, write_corpus, CorpusReader, CorpusWriter, LoadedCorpus, ReadStats};
pub use synth::{apportion, synthesize_corpus, synthesize_to_file, ScoreLatent, SynthesisSpec};

/// Per-document score map, kept in insertion order so files round-trip.
pub type ScoreMap = IndexMap<String, f64>;

/// Source domain of a document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainTag(String);

impl DomainTag {
    pub fn new(name: impl Into<String>) -> Self {
        DomainTag(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The enumeration of accepted domain tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainSet(Vec<DomainTag>);

impl DomainSet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tags: Vec<DomainTag> = Vec::new();
        for name in names {
            let tag = DomainTag::new(name);
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        DomainSet(tags)
    }

    pub fn lookup(&self, name: &str) -> Option<&DomainTag> {
        self.0.iter().find(|t| t.as_str() == name)
    }

    pub fn tags(&self) -> &[DomainTag] {
        &self.0
    }
}

impl Default for DomainSet {
    fn default() -> Self {
        DomainSet::new(SLIMPAJAMA_DOMAIN_PERCENT.iter().map(|(n, _)| *n))
    }
}

/// How a document's token count is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TokenEstimator {
    /// Whitespace-delimited words.
    #[default]
    Whitespace,
    /// `round(chars / chars_per_token)`.
    CharRatio { chars_per_token: f64 },
}

impl TokenEstimator {
    /// ModernBERT-like ratio of 0.77 characters per token.
    pub const fn char_ratio() -> Self {
        TokenEstimator::CharRatio {
            chars_per_token: 0.77,
        }
    }

    pub fn count(&self, text: &str) -> u64 {
        match *self {
            TokenEstimator::Whitespace => text.split_whitespace().count() as u64,
            TokenEstimator::CharRatio { chars_per_token } => {
                (text.chars().count() as f64 / chars_per_token).round() as u64
            }
        }
    }
}

/// Validation rules applied while reading a corpus.
#[derive(Debug, Clone)]
pub struct CorpusSchema {
    pub domains: DomainSet,
    pub tokenizer: TokenEstimator,
    /// Lines longer than this are rejected without being buffered.
    pub max_line_bytes: usize,
}

impl Default for CorpusSchema {
    fn default() -> Self {
        CorpusSchema {
            domains: DomainSet::default(),
            tokenizer: TokenEstimator::Whitespace,
            max_line_bytes: 64 << 20,
        }
    }
}

/// One corpus record. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub domain: DomainTag,
    pub token_estimate: u64,
    pub scores: Option<ScoreMap>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        domain: DomainTag,
        tokenizer: &TokenEstimator,
    ) -> Self {
        let text = text.into();
        Document {
            id: id.into(),
            token_estimate: tokenizer.count(&text),
            text,
            domain,
            scores: None,
        }
    }

    pub fn with_scores(mut self, scores: ScoreMap) -> Self {
        self.scores = Some(scores);
        self
    }

    pub fn score(&self, name: &str) -> Option<f64> {
        self.scores.as_ref().and_then(|s| s.get(name).copied())
    }
}
