use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64_with_seed;

use super::sampling::dirichlet_point;
use super::trainer::{ProxyConfig, TrainRequest, Trainer};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::scores::ScoreMatrix;
use crate::selection::{select_top_k, PoolEntry, SelectionPlan, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerMetadata {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    /// Tokens the trainer consumed, or the selected tokens if it did not say.
    pub tokens: u64,
}

/// One proxy experiment: weights, selection and the resulting loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment_id: String,
    pub index: usize,
    pub status: ExperimentStatus,
    pub weights: WeightVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
    pub selected_documents: usize,
    pub selected_tokens: u64,
    pub trainer: TrainerMetadata,
}

impl ExperimentRecord {
    pub fn is_ok(&self) -> bool {
        self.status == ExperimentStatus::Ok && self.loss.is_some_and(f64::is_finite)
    }
}

#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub experiments: usize,
    pub seed: u64,
    /// Scores the weights range over.
    pub names: Vec<String>,
    pub proxy: ProxyConfig,
    pub concentration: f64,
    /// Abort once more than this fraction of planned experiments fails.
    pub max_failure_rate: f64,
    /// Experiments run concurrently between log flushes.
    pub batch_size: usize,
    /// Append-only JSONL log; completed experiments found there are skipped.
    pub log_path: Option<PathBuf>,
    pub manifest_dir: Option<PathBuf>,
    pub valset: Option<PathBuf>,
}

impl CampaignSpec {
    pub fn new(names: Vec<String>, experiments: usize, seed: u64) -> Self {
        CampaignSpec {
            experiments,
            seed,
            names,
            proxy: ProxyConfig::default(),
            concentration: 1.0,
            max_failure_rate: 0.2,
            batch_size: 32,
            log_path: None,
            manifest_dir: None,
            valset: None,
        }
    }

    pub fn experiment_id(index: usize) -> String {
        format!("exp-{index:05}")
    }

    pub fn experiment_seed(&self, index: usize) -> u64 {
        xxh3_64_with_seed(&(index as u64).to_le_bytes(), self.seed)
    }

    /// Weight vector of experiment `index`.
    pub fn weights(&self, index: usize) -> Result<WeightVector> {
        let p = dirichlet_point(self.seed, index as u64, self.names.len(), self.concentration);
        WeightVector::from_coordinates(&self.names, &p)
    }
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    /// One record per experiment index, latest attempt, in index order.
    pub records: Vec<ExperimentRecord>,
    /// Trainer invocations made by this run.
    pub invoked: usize,
    pub failed: usize,
}

/// Reads a campaign log; later lines for the same experiment win.
pub fn read_campaign_log(path: impl AsRef<std::path::Path>) -> Result<Vec<ExperimentRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut latest: HashMap<String, ExperimentRecord> = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ExperimentRecord = serde_json::from_str(&line).map_err(|e| Error::Record {
            line: i + 1,
            reason: e.to_string(),
        })?;
        latest.insert(rec.experiment_id.clone(), rec);
    }
    let mut records: Vec<ExperimentRecord> = latest.into_values().collect();
    records.sort_by(|a, b| a.index.cmp(&b.index).then_with(|| a.experiment_id.cmp(&b.experiment_id)));
    Ok(records)
}

/// Runs (or resumes) a campaign over a fixed, normalized score matrix.
pub fn run_campaign(
    matrix: &ScoreMatrix,
    pool: &[PoolEntry],
    plan: &SelectionPlan,
    trainer: &dyn Trainer,
    spec: &CampaignSpec,
    exec: Execution,
) -> Result<CampaignOutcome> {
    if spec.experiments == 0 {
        return Err(Error::invalid("campaign needs at least one experiment"));
    }
    if spec.names.is_empty() {
        return Err(Error::invalid("campaign needs at least one score"));
    }
    if !(spec.concentration > 0.0) {
        return Err(Error::invalid("Dirichlet concentration must be positive"));
    }
    for n in &spec.names {
        if matrix.column_index(n).is_none() {
            return Err(Error::UnknownScore(n.clone()));
        }
    }
    plan.validate()?;
    spec.proxy.validate()?;
    trainer.probe()?;

    let mut done: HashMap<usize, ExperimentRecord> = HashMap::new();
    if let Some(log) = &spec.log_path {
        if log.exists() {
            for rec in read_campaign_log(log)? {
                if rec.index < spec.experiments && rec.is_ok() {
                    done.insert(rec.index, rec);
                }
            }
        }
    }

    let config_path = match &spec.manifest_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let p = dir.join("proxy_config.json");
            fs::write(&p, serde_json::to_vec_pretty(&spec.proxy)?).map_err(|e| Error::io(&p, e))?;
            Some(p)
        }
        None => None,
    };
    let mut log = match &spec.log_path {
        Some(p) => Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| Error::io(p, e))?,
        ),
        None => None,
    };

    let todo: Vec<usize> = (0..spec.experiments).filter(|i| !done.contains_key(i)).collect();
    let mut invoked = 0;
    let mut failed = 0;
    for batch in todo.chunks(spec.batch_size.max(1)) {
        let results = exec.map(batch, |&index| run_one(index, matrix, pool, plan, trainer, spec, config_path.as_deref()));
        for rec in results {
            let rec = rec?;
            invoked += 1;
            if rec.status == ExperimentStatus::Failed {
                failed += 1;
                log::warn!("{} failed: {}", rec.experiment_id, rec.error.as_deref().unwrap_or(""));
            }
            if let (Some(file), Some(path)) = (log.as_mut(), spec.log_path.as_ref()) {
                let mut line = serde_json::to_vec(&rec)?;
                line.push(b'\n');
                file.write_all(&line).map_err(|e| Error::io(path, e))?;
            }
            done.insert(rec.index, rec);
        }
        if let (Some(file), Some(path)) = (log.as_mut(), spec.log_path.as_ref()) {
            file.flush().map_err(|e| Error::io(path, e))?;
        }
        if failed as f64 > spec.max_failure_rate * spec.experiments as f64 {
            return Err(Error::CampaignAborted {
                failed,
                planned: spec.experiments,
            });
        }
    }

    let mut records: Vec<ExperimentRecord> = done.into_values().collect();
    records.sort_by_key(|r| r.index);
    Ok(CampaignOutcome {
        records,
        invoked,
        failed,
    })
}

fn run_one(
    index: usize,
    matrix: &ScoreMatrix,
    pool: &[PoolEntry],
    plan: &SelectionPlan,
    trainer: &dyn Trainer,
    spec: &CampaignSpec,
    config_path: Option<&std::path::Path>,
) -> Result<ExperimentRecord> {
    let id = CampaignSpec::experiment_id(index);
    let weights = spec.weights(index)?;
    // selection inside one experiment stays sequential; experiments are the parallel unit
    let selection = select_top_k(matrix, pool, &weights, plan, Execution::Sequential)?;
    let manifest = match &spec.manifest_dir {
        Some(dir) => {
            let p = dir.join(format!("{id}.txt"));
            selection.write_manifest(&p)?;
            Some(p)
        }
        None => None,
    };
    let seed = spec.experiment_seed(index);
    let request = TrainRequest {
        experiment_id: &id,
        index,
        weights: &weights,
        selection: &selection,
        manifest: manifest.as_deref(),
        config: &spec.proxy,
        config_path,
        valset: spec.valset.as_deref(),
        seed,
    };
    let outcome = trainer.train(&request);
    let (status, loss, error, steps, tokens) = match outcome {
        Ok(o) if o.loss.is_finite() => (ExperimentStatus::Ok, Some(o.loss), None, o.steps, o.tokens),
        Ok(o) => (ExperimentStatus::Failed, None, Some(format!("non-finite loss {}", o.loss)), None, None),
        Err(e) => (ExperimentStatus::Failed, None, Some(e.to_string()), None, None),
    };
    Ok(ExperimentRecord {
        experiment_id: id,
        index,
        status,
        weights,
        loss,
        error,
        manifest: manifest.map(|p| p.display().to_string()),
        selected_documents: selection.selected.len(),
        selected_tokens: selection.total_tokens,
        trainer: TrainerMetadata {
            seed,
            steps,
            tokens: tokens.unwrap_or(selection.total_tokens),
        },
    })
}
