//! Brute-force reference implementations and fixtures shared by the
//! integration tests. Written independently of the library code paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unicode_normalization::UnicodeNormalization;

// ---------------------------------------------------------------- signals

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSignals {
    pub frac_no_alph_words: f64,
    pub mean_word_length: f64,
    pub frac_unique_words: f64,
    pub unigram_entropy: f64,
    pub word_count: u64,
    pub terminal_punctuation: f64,
    pub numerical_chars_fraction: f64,
    pub uppercase_letter_fraction: f64,
    pub num_sentences: u64,
    pub frac_chars_top_2gram: f64,
    pub frac_chars_top_3gram: f64,
}

fn oracle_words(text: &str) -> Vec<String> {
    let folded: String = text.nfc().collect::<String>().to_lowercase();
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in folded.chars() {
        if c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn oracle_lines(text: &str) -> Vec<&str> {
    let mut parts: Vec<&str> = text.split('\n').collect();
    let last = parts.len() - 1;
    for p in parts[..last].iter_mut() {
        if let Some(stripped) = p.strip_suffix('\r') {
            *p = stripped;
        }
    }
    if parts[last].is_empty() {
        parts.pop();
    }
    parts
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic()
        || c.is_ascii_digit()
        || ('\u{660}'..='\u{669}').contains(&c)
        || c == '_'
        || ('\u{300}'..='\u{36f}').contains(&c)
        || c == '\u{200c}'
        || c == '\u{200d}'
}

fn is_stop(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Counts maximal runs: a word boundary, one or more non-stop characters,
/// then any stop characters.
fn oracle_sentences(text: &str) -> u64 {
    let chars: Vec<char> = text.chars().collect();
    let mut count = 0;
    let mut i = 0;
    while i < chars.len() {
        let before = i > 0 && is_word_char(chars[i - 1]);
        let boundary = before != is_word_char(chars[i]);
        if !boundary || is_stop(chars[i]) {
            i += 1;
            continue;
        }
        count += 1;
        while i < chars.len() && !is_stop(chars[i]) {
            i += 1;
        }
        while i < chars.len() && is_stop(chars[i]) {
            i += 1;
        }
    }
    count
}

fn oracle_top_ngram(words: &[String], n: usize) -> f64 {
    let total: usize = words.iter().map(|w| w.chars().count()).sum();
    if words.len() < n || total == 0 {
        return 0.0;
    }
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for i in 0..=words.len() - n {
        *counts.entry(words[i..i + n].to_vec()).or_insert(0) += 1;
    }
    let mut best = (0usize, 0usize);
    for (gram, count) in counts {
        let chars: usize = gram.iter().map(|w| w.chars().count()).sum();
        if (count, chars) > best {
            best = (count, chars);
        }
    }
    let f = (best.0 * best.1) as f64 / total as f64;
    f.min(1.0)
}

pub fn oracle_signals(text: &str) -> OracleSignals {
    let words = oracle_words(text);
    let n = words.len();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for w in &words {
        *counts.entry(w.as_str()).or_insert(0) += 1;
    }
    let (no_alpha, mean_len, unique, entropy) = if n == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let nf = n as f64;
        let no_alpha = words.iter().filter(|w| w.chars().all(|c| !c.is_alphabetic())).count() as f64 / nf;
        let mean_len = words.iter().map(|w| w.chars().count()).sum::<usize>() as f64 / nf;
        let mut h = 0.0;
        for &c in counts.values() {
            let p = c as f64 / nf;
            h -= p * p.ln();
        }
        (no_alpha, mean_len, counts.len() as f64 / nf, h.max(0.0))
    };

    let lines = oracle_lines(text);
    let (mut term, mut num, mut upper) = (0.0, 0.0, 0.0);
    for line in &lines {
        let trimmed = line.trim_end();
        if let Some(last) = trimmed.chars().last() {
            if matches!(last, '.' | '!' | '?' | '"') {
                term += 1.0;
            }
        }
        let folded: Vec<char> = line.nfc().collect::<String>().to_lowercase().chars().collect();
        if !folded.is_empty() {
            num += folded.iter().filter(|c| c.is_numeric()).count() as f64 / folded.len() as f64;
        }
        let raw: Vec<char> = line.chars().collect();
        if !raw.is_empty() {
            upper += raw.iter().filter(|c| c.is_uppercase()).count() as f64 / raw.len() as f64;
        }
    }
    let lf = lines.len() as f64;
    let per_line = |x: f64| if lines.is_empty() { 0.0 } else { x / lf };

    OracleSignals {
        frac_no_alph_words: no_alpha,
        mean_word_length: mean_len,
        frac_unique_words: unique,
        unigram_entropy: entropy,
        word_count: n as u64,
        terminal_punctuation: per_line(term),
        numerical_chars_fraction: per_line(num),
        uppercase_letter_fraction: per_line(upper),
        num_sentences: oracle_sentences(text),
        frac_chars_top_2gram: oracle_top_ngram(&words, 2),
        frac_chars_top_3gram: oracle_top_ngram(&words, 3),
    }
}

/// Compares every signal; integers exactly, reals to `tol`.
pub fn signal_mismatches(text: &str, got: &qualmix::signals::SignalVector, tol: f64) -> Vec<String> {
    let want = oracle_signals(text);
    let mut bad = Vec::new();
    let reals = [
        ("frac_no_alph_words", got.words.frac_no_alph_words, want.frac_no_alph_words),
        ("mean_word_length", got.words.mean_word_length, want.mean_word_length),
        ("frac_unique_words", got.words.frac_unique_words, want.frac_unique_words),
        ("unigram_entropy", got.words.unigram_entropy, want.unigram_entropy),
        ("terminal_punctuation", got.lines.terminal_punctuation, want.terminal_punctuation),
        ("numerical_chars_fraction", got.lines.numerical_chars_fraction, want.numerical_chars_fraction),
        ("uppercase_letter_fraction", got.lines.uppercase_letter_fraction, want.uppercase_letter_fraction),
        ("frac_chars_top_2gram", got.ngrams.frac_chars_top_2gram, want.frac_chars_top_2gram),
        ("frac_chars_top_3gram", got.ngrams.frac_chars_top_3gram, want.frac_chars_top_3gram),
    ];
    for (name, g, w) in reals {
        if (g - w).abs() > tol {
            bad.push(format!("{name}: got {g}, oracle {w}"));
        }
    }
    if got.words.word_count != want.word_count {
        bad.push(format!("word_count: got {}, oracle {}", got.words.word_count, want.word_count));
    }
    if got.num_sentences != want.num_sentences {
        bad.push(format!("num_sentences: got {}, oracle {}", got.num_sentences, want.num_sentences));
    }
    bad
}

const PHRASES: &[&str] = &[
    "The quick brown fox jumps over the lazy dog.",
    "Le café était fermé, alors nous sommes partis!",
    "Die Straße ist 42 Meter lang? Ja.",
    "Η γλώσσα είναι ΕΛΛΗΝΙΚΗ και όμορφη.",
    "Москва - столица России. Население 12 миллионов!",
    "我们今天去公园散步。天气很好!",
    "العربية لغة جميلة ١٢٣ وكتابتها من اليمين.",
    "日本語のテキストです。カタカナもある?",
    "café vs cafe\u{301} vs CAFÉ",
    "THE END",
    "x = 3.14159 and y = 2.71828",
    "\"Quoted line\"",
    "ellipsis... really?! yes!!",
    "snake_case_identifier 1234 5678",
    "the the the the cat cat",
    "Ünïcödé ŁÓDŹ ÇA VA",
    "no punctuation here",
    "तथा हिन्दी भाषा।",
    "  leading spaces and trailing tab\t",
    "2024-01-01 12:00:00",
];

/// Deterministic multi-line documents mixing scripts, digits, case and
/// punctuation.
pub fn mixed_language_corpus(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let lines = rng.random_range(1..8);
            let mut doc = String::new();
            for l in 0..lines {
                let parts = rng.random_range(0..4);
                let mut line = String::new();
                for p in 0..parts {
                    if p > 0 {
                        line.push(' ');
                    }
                    line.push_str(PHRASES[rng.random_range(0..PHRASES.len())]);
                }
                doc.push_str(&line);
                if l + 1 < lines {
                    doc.push_str(if rng.random_bool(0.2) { "\r\n" } else { "\n" });
                }
            }
            if rng.random_bool(0.3) {
                doc.push('\n');
            }
            doc
        })
        .collect()
}

// ------------------------------------------------------------- importance

/// Exact (unhashed) smoothed feature model over unigrams and bigrams.
pub struct ExactBag {
    counts: HashMap<String, u64>,
    total: u64,
    vocabulary: f64,
    smoothing: f64,
}

pub fn exact_features(text: &str) -> Vec<String> {
    let words = oracle_words(text);
    let mut out: Vec<String> = words.clone();
    for pair in words.windows(2) {
        out.push(format!("{}\u{241F}{}", pair[0], pair[1]));
    }
    out
}

impl ExactBag {
    pub fn fit(texts: &[String], vocabulary: usize, smoothing: f64) -> Self {
        let mut counts = HashMap::new();
        let mut total = 0;
        for t in texts {
            for f in exact_features(t) {
                *counts.entry(f).or_insert(0) += 1;
                total += 1;
            }
        }
        ExactBag {
            counts,
            total,
            vocabulary: vocabulary as f64,
            smoothing,
        }
    }

    pub fn log_prob(&self, feature: &str) -> f64 {
        let c = *self.counts.get(feature).unwrap_or(&0) as f64;
        ((c + self.smoothing) / (self.total as f64 + self.smoothing * self.vocabulary)).ln()
    }

    pub fn distinct(&self) -> impl Iterator<Item = &String> {
        self.counts.keys()
    }
}

pub fn exact_importance(text: &str, target: &ExactBag, source: &ExactBag) -> f64 {
    exact_features(text)
        .iter()
        .map(|f| target.log_prob(f) - source.log_prob(f))
        .sum()
}

pub fn random_text(rng: &mut ChaCha8Rng, vocab: &[String], words: std::ops::Range<usize>) -> String {
    let n = rng.random_range(words);
    (0..n)
        .map(|_| vocab[rng.random_range(0..vocab.len())].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

// ------------------------------------------------------------- statistics

pub fn oracle_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut ranks = vec![0.0; n];
    for i in 0..n {
        let less = values.iter().filter(|&&v| v < values[i]).count();
        let equal = values.iter().filter(|&&v| v == values[i]).count();
        ranks[i] = less as f64 + (equal as f64 + 1.0) / 2.0;
    }
    ranks
}

pub fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let mx = sx / n;
    let my = sy / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
    oracle_pearson(&oracle_ranks(x), &oracle_ranks(y))
}

// -------------------------------------------------------------- selection

/// Per-domain full sort by (score desc, id asc), then take until the
/// domain's token target is reached.
pub fn brute_force_select(
    scores: &[f64],
    pool: &[qualmix::selection::PoolEntry],
    plan: &qualmix::selection::SelectionPlan,
) -> Vec<String> {
    let mut out = Vec::new();
    for (domain, proportion) in &plan.domain_targets {
        let target = proportion * plan.token_budget as f64;
        let mut rows: Vec<usize> = (0..pool.len()).filter(|&r| &pool[r].domain == domain).collect();
        rows.sort_by(|&a, &b| {
            scores[b]
                .partial_cmp(&scores[a])
                .unwrap()
                .then_with(|| pool[a].id.cmp(&pool[b].id))
        });
        let mut tokens = 0u64;
        for r in rows {
            if tokens as f64 >= target {
                break;
            }
            tokens += pool[r].tokens;
            out.push(pool[r].id.clone());
        }
    }
    out
}
