use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use qualmix::corpus::{load_corpora, synthesize_to_file, CorpusWriter, Document, ScoreMap};
use qualmix::importance::{fit_bag_model, HashedBagModel, ImportanceScorer, IMPORTANCE_NAMES};
use qualmix::optimizer::{
    fit_regressor, pca_landscape, rank_weights, read_weights_file, search_optimal, write_weights_file, SearchConfig,
};
use qualmix::proxy::flops::{flops_infer_structural, flops_train, flops_train_structural, RATING_FLOPS_E19};
use qualmix::proxy::{read_campaign_log, run_campaign, CommandTrainer, QuadraticOracle, SubsetOracle, Trainer};
use qualmix::scores::{read_ratings, spearman_matrix, ScoreMatrix, MODEL_RATERS};
use qualmix::selection::{pool_of, select_top_k, WeightVector};
use qualmix::signals::{self, SIGNAL_NAMES};
use qualmix::Execution;

use crate::config::{RunConfig, TrainerSection};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn runtime(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| runtime(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| runtime(path, e))
}

fn load_documents(config: &RunConfig) -> Result<Vec<Document>> {
    if config.corpus.paths.is_empty() {
        return Err(CliError::Invalid("no corpus configured".into()));
    }
    config.validate()?;
    let loaded = load_corpora(&config.corpus.paths, &config.corpus.schema())?;
    for e in &loaded.errors {
        log::warn!("skipped corpus record: {e}");
    }
    Ok(loaded.documents)
}

/// Score matrix over `names`, imputed and normalized per the config.
fn prepared_matrix(config: &RunConfig, docs: &[Document], names: &[String]) -> Result<ScoreMatrix> {
    let mut m = ScoreMatrix::from_documents(docs, Some(names))?;
    let filled = m.impute_missing()?;
    if filled > 0 {
        log::warn!("imputed {filled} missing model ratings");
    }
    m.normalize(config.scores.normalization.into(), Execution::default())?;
    Ok(m)
}

#[derive(Deserialize)]
struct TargetLine {
    text: String,
}

fn read_target_texts(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| runtime(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| runtime(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: TargetLine = serde_json::from_str(&line)
            .map_err(|e| CliError::Invalid(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(t.text);
    }
    Ok(out)
}

#[derive(Serialize)]
struct AnnotateReport {
    seed: u64,
    documents: usize,
    skipped_records: usize,
    scores: Vec<String>,
    ratings_written: usize,
    imputed: usize,
    coverage: std::collections::BTreeMap<String, f64>,
    unknown_rating_doc_ids: Vec<String>,
}

pub fn annotate(config: &RunConfig, output: Option<PathBuf>) -> Result<()> {
    if config.corpus.paths.is_empty() {
        return Err(CliError::Invalid("no corpus configured".into()));
    }
    config.validate()?;
    let exec = Execution::default();
    let loaded = load_corpora(&config.corpus.paths, &config.corpus.schema())?;
    for e in &loaded.errors {
        log::warn!("skipped corpus record: {e}");
    }
    let mut docs = loaded.documents;
    let names = &config.scores.names;
    let mut matrix = ScoreMatrix::from_documents(&docs, Some(names))?;
    let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();

    if names.iter().any(|n| SIGNAL_NAMES.contains(&n.as_str())) {
        for (row, sv) in signals::compute_batch(&texts, exec).into_iter().enumerate() {
            for (name, value) in sv.named() {
                if let Some(col) = matrix.column_index(name) {
                    matrix.set(row, col, value)?;
                }
            }
        }
    }

    let targets: Vec<(&String, &PathBuf)> = config
        .scores
        .importance
        .targets
        .iter()
        .filter(|(n, _)| names.contains(n))
        .collect();
    if !targets.is_empty() && !docs.is_empty() {
        let bag = config.scores.importance.bag_config();
        let source = fit_bag_model(&texts, bag, exec)?;
        for (name, path) in targets {
            debug_assert!(IMPORTANCE_NAMES.contains(&name.as_str()));
            let target_texts = read_target_texts(path)?;
            let target: HashedBagModel = fit_bag_model(&target_texts, bag, exec)?;
            let scorer = ImportanceScorer::new(&target, &source)?;
            let col = matrix.column_index(name).expect("configured name");
            for (row, v) in scorer.score_batch(&texts, exec).into_iter().enumerate() {
                matrix.set(row, col, v)?;
            }
        }
    }

    let mut report = AnnotateReport {
        seed: config.seed,
        documents: docs.len(),
        skipped_records: loaded.errors.len(),
        scores: names.clone(),
        ratings_written: 0,
        imputed: 0,
        coverage: Default::default(),
        unknown_rating_doc_ids: Vec::new(),
    };
    if let Some(path) = &config.scores.ratings {
        let ingest = matrix.ingest_ratings(read_ratings(path)?)?;
        if !ingest.unknown_doc_ids.is_empty() {
            log::warn!("{} rated documents are not in the corpus", ingest.unknown_doc_ids.len());
        }
        report.ratings_written = ingest.written;
        report.unknown_rating_doc_ids = ingest.unknown_doc_ids;
    }
    if matrix.rows() > 0 {
        for (col, name) in names.iter().enumerate() {
            if !MODEL_RATERS.contains(&name.as_str()) {
                continue;
            }
            let coverage = (matrix.rows() - matrix.missing_in_column(col)) as f64 / matrix.rows() as f64;
            report.coverage.insert(name.clone(), coverage);
            if coverage < config.scores.min_coverage {
                return Err(CliError::Invalid(format!(
                    "rater `{name}` covers {:.1}% of documents, below the {:.1}% minimum",
                    coverage * 100.0,
                    config.scores.min_coverage * 100.0
                )));
            }
        }
        report.imputed = matrix.impute_missing()?;
    }

    for (row, doc) in docs.iter_mut().enumerate() {
        let scores: ScoreMap = names
            .iter()
            .enumerate()
            .map(|(col, n)| (n.clone(), matrix.raw(row, col).expect("complete")))
            .collect();
        doc.scores = Some(scores);
    }
    let out = output.unwrap_or_else(|| config.output_dir.join("annotated.jsonl"));
    let file = File::create(&out).map_err(|e| runtime(&out, e))?;
    let mut w = CorpusWriter::new(BufWriter::new(file));
    for d in &docs {
        w.write(d).map_err(|e| runtime(&out, e))?;
    }
    w.finish().and_then(|mut f| f.flush()).map_err(|e| runtime(&out, e))?;
    write_json(&config.output_dir.join("annotate_report.json"), &report)?;
    println!("annotated {} documents -> {}", docs.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct SelectSummary<'a> {
    seed: u64,
    weights: &'a WeightVector,
    #[serde(flatten)]
    report: qualmix::selection::SelectionReport,
}

pub fn select(config: &RunConfig, weights: &Path, cc_only: bool) -> Result<()> {
    if !weights.is_file() {
        return Err(CliError::Invalid(format!("weights file {} does not exist", weights.display())));
    }
    let w = read_weights_file(weights).map_err(|e| CliError::Invalid(e.to_string()))?;
    let plan = config.plan.plan(cc_only)?;
    let docs = load_documents(config)?;
    let matrix = prepared_matrix(config, &docs, w.names())?;
    let pool = pool_of(&docs);
    let result = select_top_k(&matrix, &pool, &w, &plan, Execution::default())?;
    let dir = &config.output_dir;
    result.write_manifest(dir.join("manifest.txt"))?;
    write_json(
        &dir.join("selection_report.json"),
        &SelectSummary {
            seed: config.seed,
            weights: &w,
            report: result.report(),
        },
    )?;
    for d in &result.domains {
        if let Some(s) = d.shortfall_tokens {
            log::warn!("domain {} is short by {s} tokens", d.domain);
        }
    }
    println!(
        "selected {} documents, {} tokens -> {}",
        result.selected.len(),
        result.total_tokens,
        dir.join("manifest.txt").display()
    );
    Ok(())
}

#[derive(Serialize)]
struct CampaignSummary {
    seed: u64,
    experiments: usize,
    completed: usize,
    invoked: usize,
    failed: usize,
    log: PathBuf,
}

pub fn campaign(config: &RunConfig) -> Result<()> {
    let spec = config.campaign_spec();
    let docs = load_documents(config)?;
    let matrix = prepared_matrix(config, &docs, &spec.names)?;
    let plan = config.plan.plan(false)?;
    let pool = pool_of(&docs);
    let trainer: Box<dyn Trainer> = match &config.campaign.trainer {
        TrainerSection::Quadratic { optimum, base, sigma } => {
            let optimum = WeightVector::new(optimum.iter().map(|(n, w)| (n.clone(), *w)))?;
            Box::new(QuadraticOracle::new(optimum, *base, *sigma, config.seed))
        }
        TrainerSection::Subset { drivers, base, sigma } => {
            let names: Vec<String> = drivers.keys().cloned().collect();
            let driver_matrix = prepared_matrix(config, &docs, &names)?;
            let drivers: Vec<(String, f64)> = drivers.iter().map(|(n, c)| (n.clone(), *c)).collect();
            Box::new(SubsetOracle::from_matrix(&driver_matrix, &drivers, *base, *sigma, config.seed)?)
        }
        TrainerSection::Command { program, args } => Box::new(CommandTrainer {
            program: program.clone(),
            args: args.clone(),
        }),
    };
    let outcome = run_campaign(&matrix, &pool, &plan, trainer.as_ref(), &spec, Execution::default())?;
    let log = spec.log_path.clone().expect("campaign log");
    write_json(
        &config.output_dir.join("campaign_summary.json"),
        &CampaignSummary {
            seed: config.seed,
            experiments: spec.experiments,
            completed: outcome.records.iter().filter(|r| r.is_ok()).count(),
            invoked: outcome.invoked,
            failed: outcome.failed,
            log: log.clone(),
        },
    )?;
    println!(
        "campaign: {} experiments, {} run now, {} failed -> {}",
        spec.experiments,
        outcome.invoked,
        outcome.failed,
        log.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct FitReport<'a> {
    seed: u64,
    records: usize,
    usable_records: usize,
    w_star: &'a WeightVector,
    predicted_loss_at_star: f64,
    mean_predicted_loss: f64,
    model: &'a qualmix::optimizer::FitMetadata,
    search: SearchConfig,
    explained_variance_ratio: Option<Vec<f64>>,
}

pub fn fit(config: &RunConfig) -> Result<()> {
    let log = config.log_path();
    if !log.is_file() {
        return Err(CliError::Invalid(format!("campaign log {} does not exist", log.display())));
    }
    let records = read_campaign_log(&log).map_err(|e| CliError::Invalid(e.to_string()))?;
    let usable = records.iter().filter(|r| r.is_ok()).count();
    let model = fit_regressor(&records, &config.regressor_hyper())?;
    let search = SearchConfig {
        candidates: config.optimizer.candidates,
        top_k: config.optimizer.top_k,
        seed: config.seed,
        concentration: config.optimizer.concentration,
    };
    let outcome = search_optimal(&model, &search, Execution::default())?;
    let dir = &config.output_dir;
    write_weights_file(dir.join("weights.json"), &rank_weights(&outcome.w_star))?;
    write_json(&dir.join("model.json"), &model)?;

    let ok: Vec<_> = records.iter().filter(|r| r.is_ok()).cloned().collect();
    let ratio = match pca_landscape(&ok, &model, config.optimizer.grid) {
        Ok(land) => {
            land.write_grid_csv(dir.join("landscape_grid.csv"))?;
            land.write_points_csv(dir.join("landscape_points.csv"))?;
            Some(land.explained_ratio.clone())
        }
        Err(e) => {
            log::warn!("no landscape: {e}");
            None
        }
    };
    write_json(
        &dir.join("fit_report.json"),
        &FitReport {
            seed: config.seed,
            records: records.len(),
            usable_records: usable,
            w_star: &outcome.w_star,
            predicted_loss_at_star: outcome.predicted_loss_at_star,
            mean_predicted_loss: outcome.mean_predicted_loss,
            model: &model.metadata,
            search,
            explained_variance_ratio: ratio,
        },
    )?;
    print!("{}", rank_weights(&outcome.w_star));
    Ok(())
}

pub fn correlate(config: &RunConfig) -> Result<()> {
    let docs = load_documents(config)?;
    let mut m = ScoreMatrix::from_documents(&docs, Some(&config.scores.names))?;
    m.impute_missing()?;
    let corr = spearman_matrix(&m, Execution::default())?;
    for &(i, j) in &corr.undefined {
        log::warn!("correlation of `{}` and `{}` is undefined", corr.names[i], corr.names[j]);
    }
    let out = config.output_dir.join("spearman.csv");
    corr.write_csv(&out)?;
    println!("{}x{} correlations -> {}", corr.dim(), corr.dim(), out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Nominal parameter count, for `6 · params · tokens`.
    #[arg(long, requires = "tokens")]
    pub params: Option<f64>,
    #[arg(long)]
    pub tokens: Option<f64>,
    /// Structural estimate: layers.
    #[arg(long, requires_all = ["hidden", "seq_len", "samples"], conflicts_with = "params")]
    pub layers: Option<f64>,
    #[arg(long)]
    pub hidden: Option<f64>,
    #[arg(long)]
    pub seq_len: Option<f64>,
    #[arg(long)]
    pub samples: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub epochs: f64,
    /// Structural inference cost instead of training.
    #[arg(long, requires = "layers")]
    pub infer: bool,
}

fn e19(flops: f64) -> String {
    format!("{:.2}", flops / 1e19)
}

pub fn cost(args: &CostArgs) -> Result<()> {
    for v in [args.params, args.tokens, args.layers, args.hidden, args.seq_len, args.samples]
        .into_iter()
        .flatten()
        .chain([args.epochs])
    {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(CliError::Invalid(format!("{v} is not a nonnegative size")));
        }
    }
    let mut out = std::io::stdout().lock();
    let line = |out: &mut std::io::StdoutLock, label: &str, value: String| {
        writeln!(out, "{label:<40} {value:>10} x 10^19").map_err(|e| CliError::Runtime(e.to_string()))
    };
    if let (Some(p), Some(t)) = (args.params, args.tokens) {
        return line(&mut out, "training (6 N D)", e19(flops_train(p, t)));
    }
    if let (Some(l), Some(h), Some(s), Some(d)) = (args.layers, args.hidden, args.seq_len, args.samples) {
        return if args.infer {
            line(&mut out, "inference (2 L H^2 T D)", e19(flops_infer_structural(l, h, s, d)))
        } else {
            line(&mut out, "training (6 L H^2 T D E)", e19(flops_train_structural(l, h, s, d, args.epochs)))
        };
    }
    line(&mut out, "1.3B Model on 30B Tokens", e19(flops_train(1.3e9, 30e9)))?;
    line(&mut out, "3.3B Model on 100B Tokens", e19(flops_train(3.3e9, 100e9)))?;
    for (label, v) in RATING_FLOPS_E19 {
        line(&mut out, label, format!("{v:.2}"))?;
    }
    Ok(())
}

pub fn synth(config: &RunConfig, output: Option<PathBuf>) -> Result<()> {
    let out = output.unwrap_or_else(|| config.output_dir.join("synth.jsonl"));
    let n = synthesize_to_file(&config.synth, config.seed, &out)?;
    println!("wrote {n} documents -> {}", out.display());
    Ok(())
}
