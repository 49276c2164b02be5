mod common;

use proptest::prelude::*;
use qualmix::signals::{self, compute, compute_batch, SIGNAL_NAMES};
use qualmix::Execution;

#[test]
fn mixed_language_fixture_matches_oracle() {
    let docs = common::mixed_language_corpus(200, 17);
    for (i, text) in docs.iter().enumerate() {
        let bad = common::signal_mismatches(text, &compute(text), 1e-12);
        assert!(bad.is_empty(), "doc {i} {text:?}: {bad:?}");
    }
}

#[test]
fn batch_modes_agree() {
    let docs = common::mixed_language_corpus(300, 5);
    let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
    assert_eq!(
        compute_batch(&refs, Execution::Sequential),
        compute_batch(&refs, Execution::Parallel)
    );
}

#[test]
fn examples() {
    assert_eq!(signals::sentence_count("Hi. Bye!"), 2);
    assert_eq!(signals::sentence_count(""), 0);
    let s = compute("the cat the");
    assert!((s.words.unigram_entropy - 0.63651).abs() < 1e-5);
    let s = compute("a b a b a b");
    assert!((s.ngrams.frac_chars_top_2gram - 1.0).abs() < 1e-12);
    assert_eq!(SIGNAL_NAMES.len(), 11);
}

fn any_text() -> impl Strategy<Value = String> {
    prop_oneof![
        ".{0,200}",
        "[a-zA-Z0-9 .!?\n\"]{0,200}",
        "(word|WORD|42|é|\u{301}|!|\\.| |\n|\r\n|\t){0,80}",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn fractions_bounded_and_deterministic(text in any_text()) {
        let s = compute(&text);
        let fractions = [
            s.words.frac_no_alph_words,
            s.words.frac_unique_words,
            s.lines.terminal_punctuation,
            s.lines.numerical_chars_fraction,
            s.lines.uppercase_letter_fraction,
            s.ngrams.frac_chars_top_2gram,
            s.ngrams.frac_chars_top_3gram,
        ];
        for f in fractions {
            prop_assert!((0.0..=1.0).contains(&f), "{f}");
        }
        let n = s.words.word_count as f64;
        prop_assert!(s.words.unigram_entropy >= 0.0);
        if n > 0.0 {
            prop_assert!(s.words.unigram_entropy <= n.ln() + 1e-12);
        }
        prop_assert!(s.words.mean_word_length >= 0.0);
        prop_assert_eq!(s, compute(&text));
    }
}
