//! Rule-based natural-language quality signals.
//!
//! Words are maximal non-whitespace runs of the NFC-normalized, lowercased
//! text. Line-level ratios are averaged over lines. Every fraction lies in
//! `[0, 1]` and an empty document scores zero everywhere.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::Document;
use crate::exec::Execution;

pub const FRAC_NO_ALPH_WORDS: &str = "doc_frac_no_alph_words";
pub const MEAN_WORD_LENGTH: &str = "doc_mean_word_length";
pub const FRAC_UNIQUE_WORDS: &str = "doc_frac_unique_words";
pub const UNIGRAM_ENTROPY: &str = "doc_unigram_entropy";
pub const WORD_COUNT: &str = "doc_word_count";
pub const TERMINAL_PUNCTUATION: &str = "lines_ending_with_terminal_punctution_mark";
pub const NUMERICAL_CHARS_FRACTION: &str = "lines_numerical_chars_fraction";
pub const UPPERCASE_LETTER_FRACTION: &str = "lines_uppercase_letter_fraction";
pub const NUM_SENTENCES: &str = "doc_num_sentences";
pub const FRAC_CHARS_TOP_2GRAM: &str = "doc_frac_chars_top_2gram";
pub const FRAC_CHARS_TOP_3GRAM: &str = "doc_frac_chars_top_3gram";

/// Signal names in canonical order.
pub const SIGNAL_NAMES: [&str; 11] = [
    FRAC_NO_ALPH_WORDS,
    MEAN_WORD_LENGTH,
    FRAC_UNIQUE_WORDS,
    UNIGRAM_ENTROPY,
    WORD_COUNT,
    TERMINAL_PUNCTUATION,
    NUMERICAL_CHARS_FRACTION,
    UPPERCASE_LETTER_FRACTION,
    NUM_SENTENCES,
    FRAC_CHARS_TOP_2GRAM,
    FRAC_CHARS_TOP_3GRAM,
];

const TERMINAL_MARKS: [char; 4] = ['.', '!', '?', '"'];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WordSignals {
    pub frac_no_alph_words: f64,
    pub mean_word_length: f64,
    pub frac_unique_words: f64,
    pub unigram_entropy: f64,
    pub word_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LineSignals {
    pub terminal_punctuation: f64,
    pub numerical_chars_fraction: f64,
    pub uppercase_letter_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NgramSignals {
    pub frac_chars_top_2gram: f64,
    pub frac_chars_top_3gram: f64,
}

/// All eleven signals for one document.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SignalVector {
    pub words: WordSignals,
    pub lines: LineSignals,
    pub num_sentences: u64,
    pub ngrams: NgramSignals,
}

impl SignalVector {
    pub fn of(doc: &Document) -> Self {
        compute(&doc.text)
    }

    /// `(name, value)` pairs in canonical order.
    pub fn named(&self) -> [(&'static str, f64); 11] {
        [
            (FRAC_NO_ALPH_WORDS, self.words.frac_no_alph_words),
            (MEAN_WORD_LENGTH, self.words.mean_word_length),
            (FRAC_UNIQUE_WORDS, self.words.frac_unique_words),
            (UNIGRAM_ENTROPY, self.words.unigram_entropy),
            (WORD_COUNT, self.words.word_count as f64),
            (TERMINAL_PUNCTUATION, self.lines.terminal_punctuation),
            (NUMERICAL_CHARS_FRACTION, self.lines.numerical_chars_fraction),
            (UPPERCASE_LETTER_FRACTION, self.lines.uppercase_letter_fraction),
            (NUM_SENTENCES, self.num_sentences as f64),
            (FRAC_CHARS_TOP_2GRAM, self.ngrams.frac_chars_top_2gram),
            (FRAC_CHARS_TOP_3GRAM, self.ngrams.frac_chars_top_3gram),
        ]
    }
}

/// NFC + lowercase.
pub fn normalize(text: &str) -> String {
    text.nfc().collect::<String>().to_lowercase()
}

/// Word stream of already-normalized text.
pub fn words(normalized: &str) -> Vec<&str> {
    normalized.split_whitespace().collect()
}

pub fn compute(text: &str) -> SignalVector {
    let normalized = normalize(text);
    let words = words(&normalized);
    SignalVector {
        words: word_signals_of(&words),
        lines: line_signals(text),
        num_sentences: sentence_count(text),
        ngrams: ngram_signals_of(&words),
    }
}

/// Signals for a batch of documents, in input order.
pub fn compute_batch(texts: &[&str], exec: Execution) -> Vec<SignalVector> {
    exec.map(texts, |t| compute(t))
}

pub fn word_signals(text: &str) -> WordSignals {
    let normalized = normalize(text);
    word_signals_of(&words(&normalized))
}

fn word_signals_of(words: &[&str]) -> WordSignals {
    if words.is_empty() {
        return WordSignals::default();
    }
    let n = words.len() as f64;
    let mut no_alpha = 0usize;
    let mut chars = 0usize;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for w in words {
        if !w.chars().any(char::is_alphabetic) {
            no_alpha += 1;
        }
        chars += w.chars().count();
        *counts.entry(w).or_default() += 1;
    }
    // sorted so the float sum is independent of hash order
    let mut freqs: Vec<usize> = counts.values().copied().collect();
    freqs.sort_unstable();
    let entropy = freqs
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0);
    WordSignals {
        frac_no_alph_words: no_alpha as f64 / n,
        mean_word_length: chars as f64 / n,
        frac_unique_words: counts.len() as f64 / n,
        unigram_entropy: entropy,
        word_count: words.len() as u64,
    }
}

/// Per-line ratios averaged over `text.lines()`. Numerical characters are
/// counted on the normalized line, uppercase letters on the raw line.
pub fn line_signals(text: &str) -> LineSignals {
    let mut lines = 0usize;
    let mut terminal = 0usize;
    let mut numeric_sum = 0.0;
    let mut upper_sum = 0.0;
    for line in text.lines() {
        lines += 1;
        if line.trim_end().ends_with(TERMINAL_MARKS) {
            terminal += 1;
        }
        let normalized = normalize(line);
        let total = normalized.chars().count();
        if total > 0 {
            numeric_sum += normalized.chars().filter(|c| c.is_numeric()).count() as f64 / total as f64;
        }
        let total = line.chars().count();
        if total > 0 {
            upper_sum += line.chars().filter(|c| c.is_uppercase()).count() as f64 / total as f64;
        }
    }
    if lines == 0 {
        return LineSignals::default();
    }
    let n = lines as f64;
    LineSignals {
        terminal_punctuation: terminal as f64 / n,
        numerical_chars_fraction: numeric_sum / n,
        uppercase_letter_fraction: upper_sum / n,
    }
}

fn sentence_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"\b[^.!?]+[.!?]*").expect("valid pattern"))
}

/// Non-overlapping matches of `\b[^.!?]+[.!?]*` in the raw text.
pub fn sentence_count(text: &str) -> u64 {
    sentence_pattern().find_iter(text).count() as u64
}

pub fn ngram_repetition(text: &str) -> NgramSignals {
    let normalized = normalize(text);
    ngram_signals_of(&words(&normalized))
}

fn ngram_signals_of(words: &[&str]) -> NgramSignals {
    let lengths: Vec<usize> = words.iter().map(|w| w.chars().count()).collect();
    let total: usize = lengths.iter().sum();
    NgramSignals {
        frac_chars_top_2gram: top_ngram_fraction(words, &lengths, total, 2),
        frac_chars_top_3gram: top_ngram_fraction(words, &lengths, total, 3),
    }
}

/// `count(top n-gram) * chars(top n-gram) / chars(all words)`, overlapping
/// occurrences counted. Among equally frequent n-grams the longest wins.
fn top_ngram_fraction(words: &[&str], lengths: &[usize], total: usize, n: usize) -> f64 {
    if words.len() < n || total == 0 {
        return 0.0;
    }
    let mut counts: HashMap<&[&str], (usize, usize)> = HashMap::new();
    for (start, gram) in words.windows(n).enumerate() {
        let entry = counts.entry(gram).or_insert((0, 0));
        entry.0 += 1;
        entry.1 = lengths[start..start + n].iter().sum();
    }
    let (count, chars) = counts
        .values()
        .copied()
        .max()
        .expect("at least one n-gram");
    (count as f64 * chars as f64 / total as f64).clamp(0.0, 1.0)
}
