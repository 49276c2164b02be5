use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qualmix::corpus::{synthesize_corpus, SynthesisSpec};
use qualmix::importance::{fit_bag_model, BagConfig};
use qualmix::optimizer::{fit_regressor, search_optimal, RegressorHyper, SearchConfig};
use qualmix::presets::learned_weights;
use qualmix::proxy::{sample_weights, ExperimentRecord, ExperimentStatus, QuadraticOracle, TrainerMetadata};
use qualmix::scores::{Normalization, ScoreMatrix};
use qualmix::selection::{pool_of, select_top_k, SelectionPlan, WeightVector};
use qualmix::{signals, Execution};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn corpus(n: usize) -> Vec<qualmix::corpus::Document> {
    let spec = SynthesisSpec {
        documents: n,
        ..SynthesisSpec::default()
    };
    synthesize_corpus(&spec, 7).unwrap()
}

fn bench_signals(c: &mut Criterion) {
    let docs = corpus(2000);
    let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
    let mut g = c.benchmark_group("signals");
    g.throughput(Throughput::Elements(texts.len() as u64));
    for (label, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| signals::compute_batch(black_box(&texts), exec))
        });
    }
    g.finish();
}

fn bench_bag_fit(c: &mut Criterion) {
    let docs = corpus(2000);
    let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
    let config = BagConfig {
        bucket_count: 1 << 16,
        ..BagConfig::default()
    };
    let mut g = c.benchmark_group("bag_fit");
    g.throughput(Throughput::Elements(texts.len() as u64));
    for (label, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| fit_bag_model(black_box(&texts), config, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_select(c: &mut Criterion) {
    let docs = corpus(20_000);
    let pool = pool_of(&docs);
    let mut matrix = ScoreMatrix::from_documents(&docs, None).unwrap();
    matrix.normalize(Normalization::Rank, Execution::Parallel).unwrap();
    let plan = SelectionPlan::slimpajama(1_000_000);
    let w = learned_weights();
    let mut g = c.benchmark_group("aggregate_select");
    g.sample_size(20);
    g.throughput(Throughput::Elements(pool.len() as u64));
    for (label, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| select_top_k(black_box(&matrix), &pool, &w, &plan, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_search(c: &mut Criterion) {
    let names: Vec<String> = (0..8).map(|i| format!("q{i}")).collect();
    let optimum = WeightVector::uniform(&names).unwrap();
    let oracle = QuadraticOracle::new(optimum, 1.0, 0.01, 3);
    let records: Vec<ExperimentRecord> = sample_weights(&names, 256, 3)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(index, weights)| ExperimentRecord {
            experiment_id: format!("exp-{index:05}"),
            index,
            status: ExperimentStatus::Ok,
            loss: Some(oracle.loss(&weights)),
            weights,
            error: None,
            manifest: None,
            selected_documents: 0,
            selected_tokens: 0,
            trainer: TrainerMetadata {
                seed: 0,
                steps: None,
                tokens: 0,
            },
        })
        .collect();
    let model = fit_regressor(&records, &RegressorHyper::default()).unwrap();
    let config = SearchConfig {
        candidates: 50_000,
        ..SearchConfig::default()
    };
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.throughput(Throughput::Elements(config.candidates as u64));
    for (label, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| search_optimal(black_box(&model), &config, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_signals, bench_bag_fit, bench_select, bench_search);
criterion_main!(benches);
