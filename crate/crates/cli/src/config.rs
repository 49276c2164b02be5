use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Deserialize;

use qualmix::corpus::{CorpusSchema, DomainSet, SynthesisSpec, TokenEstimator};
use qualmix::importance::{BagConfig, DEFAULT_BUCKETS, IMPORTANCE_NAMES};
use qualmix::optimizer::RegressorHyper;
use qualmix::proxy::{CampaignSpec, ProxyConfig};
use qualmix::scores::{Normalization, CANONICAL_SCORE_NAMES};
use qualmix::selection::{SelectionPlan, TieBreak};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub output_dir: PathBuf,
    pub corpus: CorpusSection,
    pub scores: ScoresSection,
    pub plan: PlanSection,
    pub campaign: CampaignSection,
    pub optimizer: OptimizerSection,
    pub synth: SynthesisSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            threads: 0,
            output_dir: PathBuf::from("qualmix-out"),
            corpus: CorpusSection::default(),
            scores: ScoresSection::default(),
            plan: PlanSection::default(),
            campaign: CampaignSection::default(),
            optimizer: OptimizerSection::default(),
            synth: SynthesisSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub paths: Vec<PathBuf>,
    /// Allowed domain labels; the SlimPajama sources when absent.
    pub domains: Option<Vec<String>>,
    pub tokenizer: TokenEstimator,
    pub max_line_bytes: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            paths: Vec::new(),
            domains: None,
            tokenizer: TokenEstimator::Whitespace,
            max_line_bytes: 64 << 20,
        }
    }
}

impl CorpusSection {
    pub fn schema(&self) -> CorpusSchema {
        CorpusSchema {
            domains: match &self.domains {
                Some(d) => DomainSet::new(d.iter().cloned()),
                None => DomainSet::default(),
            },
            tokenizer: self.tokenizer,
            max_line_bytes: self.max_line_bytes,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoresSection {
    pub names: Vec<String>,
    /// JSONL model ratings, one `{doc_id, rater, value}` per line.
    pub ratings: Option<PathBuf>,
    /// Minimum fraction of documents that must carry each model rating
    /// before the rest are imputed.
    pub min_coverage: f64,
    pub normalization: NormalizationMode,
    pub importance: ImportanceSection,
}

impl Default for ScoresSection {
    fn default() -> Self {
        ScoresSection {
            names: CANONICAL_SCORE_NAMES.iter().map(|s| s.to_string()).collect(),
            ratings: None,
            min_coverage: 0.5,
            normalization: NormalizationMode::Rank,
            importance: ImportanceSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    Rank,
    Zscore,
}

impl From<NormalizationMode> for Normalization {
    fn from(m: NormalizationMode) -> Self {
        match m {
            NormalizationMode::Rank => Normalization::Rank,
            NormalizationMode::Zscore => Normalization::ZScore,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImportanceSection {
    /// Importance score name to a JSONL file of target documents (`text` field).
    pub targets: IndexMap<String, PathBuf>,
    pub bucket_count: usize,
    pub hash_seed: u64,
    pub smoothing: f64,
}

impl Default for ImportanceSection {
    fn default() -> Self {
        ImportanceSection {
            targets: IndexMap::new(),
            bucket_count: DEFAULT_BUCKETS,
            hash_seed: 0,
            smoothing: 1.0,
        }
    }
}

impl ImportanceSection {
    pub fn bag_config(&self) -> BagConfig {
        BagConfig {
            bucket_count: self.bucket_count,
            seed: self.hash_seed,
            smoothing: self.smoothing,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    pub token_budget: u64,
    /// Domain shares; the SlimPajama mix when empty.
    pub domains: IndexMap<String, f64>,
    pub tie_break: TieBreak,
}

impl Default for PlanSection {
    fn default() -> Self {
        PlanSection {
            token_budget: 1_000_000,
            domains: IndexMap::new(),
            tie_break: TieBreak::LexicographicId,
        }
    }
}

impl PlanSection {
    pub fn plan(&self, cc_only: bool) -> qualmix::Result<SelectionPlan> {
        if cc_only {
            return Ok(SelectionPlan {
                tie_break: self.tie_break,
                ..SelectionPlan::cc_only(self.token_budget)
            });
        }
        if self.domains.is_empty() {
            return Ok(SelectionPlan {
                tie_break: self.tie_break,
                ..SelectionPlan::slimpajama(self.token_budget)
            });
        }
        SelectionPlan::new(
            self.token_budget,
            self.domains
                .iter()
                .map(|(d, p)| (qualmix::corpus::DomainTag::new(d.clone()), *p)),
            self.tie_break,
        )
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignSection {
    pub experiments: usize,
    /// Scores the weights range over; `scores.names` when empty.
    pub names: Vec<String>,
    pub concentration: f64,
    pub max_failure_rate: f64,
    pub batch_size: usize,
    /// Relative paths resolve against the output directory.
    pub log: PathBuf,
    pub write_manifests: bool,
    pub valset: Option<PathBuf>,
    pub proxy: ProxyConfig,
    pub trainer: TrainerSection,
}

impl Default for CampaignSection {
    fn default() -> Self {
        CampaignSection {
            experiments: 256,
            names: Vec::new(),
            concentration: 1.0,
            max_failure_rate: 0.2,
            batch_size: 32,
            log: PathBuf::from("campaign.jsonl"),
            write_manifests: false,
            valset: None,
            proxy: ProxyConfig::default(),
            trainer: TrainerSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum TrainerSection {
    /// `base + ‖w − optimum‖² + noise`.
    Quadratic {
        optimum: IndexMap<String, f64>,
        #[serde(default)]
        base: f64,
        #[serde(default)]
        sigma: f64,
    },
    /// `base − mean utility` of the selected documents.
    Subset {
        drivers: IndexMap<String, f64>,
        #[serde(default)]
        base: f64,
        #[serde(default)]
        sigma: f64,
    },
    Command {
        program: PathBuf,
        #[serde(default)]
        args: Vec<String>,
    },
}

impl Default for TrainerSection {
    fn default() -> Self {
        TrainerSection::Command {
            program: PathBuf::from("qualmix-proxy-train"),
            args: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub min_samples_leaf: usize,
    pub candidates: usize,
    pub top_k: usize,
    pub concentration: f64,
    /// Landscape grid points per axis.
    pub grid: usize,
    /// Campaign log to fit; the campaign's log when absent.
    pub log: Option<PathBuf>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let h = RegressorHyper::default();
        OptimizerSection {
            trees: h.trees,
            max_depth: h.max_depth,
            learning_rate: h.learning_rate,
            subsample: h.subsample,
            min_samples_leaf: h.min_samples_leaf,
            candidates: 100_000,
            top_k: 100,
            concentration: 1.0,
            grid: 25,
            log: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))?;
        // paths in the file are relative to the file
        if let Some(dir) = path.parent() {
            config.rebase(dir);
        }
        Ok(config)
    }

    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        self.corpus.paths.iter_mut().for_each(fix);
        if let Some(p) = self.scores.ratings.as_mut() {
            fix(p);
        }
        self.scores.importance.targets.values_mut().for_each(fix);
        if let Some(p) = self.campaign.valset.as_mut() {
            fix(p);
        }
        if let Some(p) = self.optimizer.log.as_mut() {
            fix(p);
        }
        if let TrainerSection::Command { program, .. } = &mut self.campaign.trainer {
            if program.components().count() > 1 {
                fix(program);
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for p in &self.corpus.paths {
            require_file(p, "corpus")?;
        }
        if let Some(p) = &self.scores.ratings {
            require_file(p, "ratings")?;
        }
        for (name, p) in &self.scores.importance.targets {
            if !IMPORTANCE_NAMES.contains(&name.as_str()) {
                return Err(CliError::Invalid(format!("`{name}` is not an importance score")));
            }
            require_file(p, "importance target")?;
        }
        if !(0.0..=1.0).contains(&self.scores.min_coverage) {
            return Err(CliError::Invalid("scores.min_coverage must lie in [0, 1]".into()));
        }
        if self.scores.names.is_empty() {
            return Err(CliError::Invalid("scores.names is empty".into()));
        }
        Ok(())
    }

    pub fn log_path(&self) -> PathBuf {
        match &self.optimizer.log {
            Some(p) => p.clone(),
            None => self.output_dir.join(&self.campaign.log),
        }
    }

    pub fn campaign_names(&self) -> Vec<String> {
        if self.campaign.names.is_empty() {
            self.scores.names.clone()
        } else {
            self.campaign.names.clone()
        }
    }

    pub fn campaign_spec(&self) -> CampaignSpec {
        let c = &self.campaign;
        let mut spec = CampaignSpec::new(self.campaign_names(), c.experiments, self.seed);
        spec.proxy = c.proxy;
        spec.concentration = c.concentration;
        spec.max_failure_rate = c.max_failure_rate;
        spec.batch_size = c.batch_size;
        spec.log_path = Some(self.output_dir.join(&c.log));
        spec.manifest_dir = c.write_manifests.then(|| self.output_dir.join("manifests"));
        spec.valset = c.valset.clone();
        spec
    }

    pub fn regressor_hyper(&self) -> RegressorHyper {
        let o = &self.optimizer;
        RegressorHyper {
            trees: o.trees,
            max_depth: o.max_depth,
            learning_rate: o.learning_rate,
            subsample: o.subsample,
            min_samples_leaf: o.min_samples_leaf,
            seed: self.seed,
        }
    }
}

fn require_file(p: &Path, what: &str) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{what} file {} does not exist", p.display())))
    }
}
