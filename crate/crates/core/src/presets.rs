//! Published constants: the SlimPajama domain mix and a reference set of
//! learned rater weights.

use crate::selection::WeightVector;

/// SlimPajama domain shares, in percent, in declaration order.
pub const SLIMPAJAMA_DOMAIN_PERCENT: [(&str, f64); 7] = [
    ("CommonCrawl", 52.20),
    ("C4", 26.70),
    ("GitHub", 5.20),
    ("Books", 4.20),
    ("ArXiv", 4.60),
    ("Wikipedia", 3.80),
    ("StackExchange", 3.30),
];

/// Reference learned weights over all 25 raters, in percent and in
/// published rank order. The published column sums to 100.30.
pub const LEARNED_WEIGHTS_PERCENT: [(&str, f64); 25] = [
    ("Educational Value", 5.64),
    ("doc_frac_no_alph_words", 4.93),
    ("Fineweb-edu", 4.93),
    ("lines_uppercase_letter_fraction", 4.88),
    ("Facts and Trivia", 4.77),
    ("doc_frac_chars_top_3gram", 4.73),
    ("lines_ending_with_terminal_punctution_mark", 4.73),
    ("doc_frac_chars_top_2gram", 4.71),
    ("wikipedia_importance", 4.69),
    ("lines_numerical_chars_fraction", 4.60),
    ("doc_num_sentences", 4.58),
    ("math_importance", 4.48),
    ("Reasoning", 4.44),
    ("doc_frac_unique_words", 4.32),
    ("doc_word_count", 4.23),
    ("doc_unigram_entropy", 4.22),
    ("books_importance", 4.14),
    ("Professionalism", 4.05),
    ("Fluency", 4.02),
    ("Readability", 3.93),
    ("Required Expertise", 3.73),
    ("Advertisement", 3.68),
    ("Cleanliness", 1.17),
    ("doc_mean_word_length", 0.65),
    ("Writing Style", 0.05),
];

/// Published ranks for [`LEARNED_WEIGHTS_PERCENT`], same order.
pub const LEARNED_WEIGHTS_RANK: [usize; 25] = [
    1, 2, 2, 4, 5, 6, 6, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25,
];

/// SlimPajama domain proportions as fractions.
pub fn slimpajama_proportions() -> Vec<(String, f64)> {
    SLIMPAJAMA_DOMAIN_PERCENT
        .iter()
        .map(|(name, pct)| (name.to_string(), pct / 100.0))
        .collect()
}

/// The learned weights as a point on the simplex (renormalized from the
/// published percentages).
pub fn learned_weights() -> WeightVector {
    WeightVector::from_unnormalized(
        LEARNED_WEIGHTS_PERCENT
            .iter()
            .map(|(name, pct)| (name.to_string(), *pct)),
    )
    .expect("published weights are positive")
}
