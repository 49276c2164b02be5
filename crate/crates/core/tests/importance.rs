mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use qualmix::importance::{bucket_of, fit_bag_model, BagConfig, HashedBagModel, ImportanceScorer};
use qualmix::Execution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BUCKETS: usize = 1 << 22;

fn vocabulary(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

fn corpus(rng: &mut ChaCha8Rng, vocab: &[String], docs: usize) -> Vec<String> {
    (0..docs).map(|_| common::random_text(rng, vocab, 1..30)).collect()
}

/// First seed under which every observed feature has its own bucket.
fn collision_free_seed(features: &HashSet<String>) -> u64 {
    (0u64..)
        .find(|&seed| {
            let buckets: HashSet<usize> = features.iter().map(|f| bucket_of(f, seed, BUCKETS)).collect();
            buckets.len() == features.len()
        })
        .unwrap()
}

#[test]
fn hashed_matches_unhashed_without_collisions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let vocab = vocabulary(100);
    let target = corpus(&mut rng, &vocab[..60], 200);
    let source = corpus(&mut rng, &vocab[40..], 200);
    let probes = corpus(&mut rng, &vocab, 300);

    let mut features = HashSet::new();
    for t in target.iter().chain(&source).chain(&probes) {
        features.extend(common::exact_features(t));
    }
    let seed = collision_free_seed(&features);
    let config = BagConfig {
        bucket_count: BUCKETS,
        seed,
        smoothing: 1.0,
    };
    let p = fit_bag_model(&target, config, Execution::Parallel).unwrap();
    let q = fit_bag_model(&source, config, Execution::Parallel).unwrap();
    let scorer = ImportanceScorer::new(&p, &q).unwrap();

    let exact_p = common::ExactBag::fit(&target, BUCKETS, 1.0);
    let exact_q = common::ExactBag::fit(&source, BUCKETS, 1.0);
    for text in &probes {
        let got = scorer.score(text);
        let want = common::exact_importance(text, &exact_p, &exact_q);
        assert!((got - want).abs() <= 1e-12, "{text}: {got} vs {want}");
    }
}

#[test]
fn tiny_vocabulary_example() {
    let config = BagConfig {
        bucket_count: 1 << 16,
        seed: 3,
        smoothing: 1.0,
    };
    let p = fit_bag_model(&["a a a b"], config, Execution::Sequential).unwrap();
    let q = fit_bag_model(&["a b b b"], config, Execution::Sequential).unwrap();
    let exact_p = common::ExactBag::fit(&["a a a b".to_string()], 1 << 16, 1.0);
    let exact_q = common::ExactBag::fit(&["a b b b".to_string()], 1 << 16, 1.0);
    let got = qualmix::importance::importance_score("a", &p, &q).unwrap();
    assert!((got - common::exact_importance("a", &exact_p, &exact_q)).abs() < 1e-12);
    assert!(got > 0.0);
}

#[test]
fn anti_symmetry_on_random_documents() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vocab = vocabulary(500);
    let config = BagConfig::default();
    let p = fit_bag_model(&corpus(&mut rng, &vocab[..300], 400), config, Execution::Parallel).unwrap();
    let q = fit_bag_model(&corpus(&mut rng, &vocab[200..], 400), config, Execution::Parallel).unwrap();
    let pq = ImportanceScorer::new(&p, &q).unwrap();
    let qp = ImportanceScorer::new(&q, &p).unwrap();
    let docs = corpus(&mut rng, &vocab, 1000);
    for d in &docs {
        assert_eq!(pq.score(d), -qp.score(d), "{d}");
    }
}

#[test]
fn identical_models_score_zero() {
    let p = fit_bag_model(&["one two three"], BagConfig::default(), Execution::Sequential).unwrap();
    assert_eq!(qualmix::importance::importance_score("two three four", &p, &p).unwrap(), 0.0);
}

#[test]
fn mismatched_models_are_rejected() {
    let a = HashedBagModel::empty(BagConfig::default()).unwrap();
    let b = HashedBagModel::empty(BagConfig {
        seed: 1,
        ..BagConfig::default()
    })
    .unwrap();
    let c = HashedBagModel::empty(BagConfig {
        bucket_count: 1024,
        ..BagConfig::default()
    })
    .unwrap();
    assert!(ImportanceScorer::new(&a, &b).is_err());
    assert!(ImportanceScorer::new(&a, &c).is_err());
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bag.json");
    let m = fit_bag_model(&["alpha beta", "beta gamma"], BagConfig::default(), Execution::Sequential).unwrap();
    m.save(&path).unwrap();
    let back = HashedBagModel::load(&path).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.total(), m.total());
}

#[test]
fn fit_modes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let docs = corpus(&mut rng, &vocabulary(200), 2000);
    let a = fit_bag_model(&docs, BagConfig::default(), Execution::Sequential).unwrap();
    let b = fit_bag_model(&docs, BagConfig::default(), Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Extra target evidence for a word raises a document's score for it,
    // as long as the target stays small next to the source plus buckets.
    #[test]
    fn more_target_evidence_raises_score(extra in 1usize..20, word in 0usize..50) {
        let vocab = vocabulary(50);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let target = corpus(&mut rng, &vocab, 40);
        let source = corpus(&mut rng, &vocab, 40);
        let config = BagConfig { bucket_count: 4096, seed: 1, smoothing: 1.0 };
        let q = fit_bag_model(&source, config, Execution::Sequential).unwrap();
        let p = fit_bag_model(&target, config, Execution::Sequential).unwrap();
        let mut boosted = target.clone();
        boosted.push(vec![vocab[word].as_str(); extra].join("\n"));
        let p2 = fit_bag_model(&boosted, config, Execution::Sequential).unwrap();
        prop_assume!(p2.total() < 2 * q.total() + 4096);
        let before = ImportanceScorer::new(&p, &q).unwrap().score(&vocab[word]);
        let after = ImportanceScorer::new(&p2, &q).unwrap().score(&vocab[word]);
        prop_assert!(after > before);
    }
}
