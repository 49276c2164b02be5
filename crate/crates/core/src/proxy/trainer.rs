use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use super::oracle::{QuadraticOracle, SubsetOracle};
use crate::error::{Error, Result};
use crate::selection::{SelectionResult, WeightVector};

/// Proxy model shape. Defaults are the 18M-parameter proxy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProxyConfig {
    pub hidden_dim: u32,
    pub layers: u32,
    pub heads: u32,
    pub kv_heads: u32,
    pub token_budget: u64,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        ProxyConfig {
            hidden_dim: 256,
            layers: 2,
            heads: 4,
            kv_heads: 4,
            token_budget: 500_000_000,
        }
    }
}

impl ProxyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.layers == 0 || self.heads == 0 || self.kv_heads == 0 || self.token_budget == 0 {
            return Err(Error::invalid("proxy configuration values must be positive"));
        }
        Ok(())
    }
}

/// Everything a trainer may need for one experiment.
#[derive(Debug)]
pub struct TrainRequest<'a> {
    pub experiment_id: &'a str,
    pub index: usize,
    pub weights: &'a WeightVector,
    pub selection: &'a SelectionResult,
    /// Manifest file, when the campaign writes manifests.
    pub manifest: Option<&'a Path>,
    pub config: &'a ProxyConfig,
    /// Serialized `config`, when the campaign writes one.
    pub config_path: Option<&'a Path>,
    pub valset: Option<&'a Path>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOutcome {
    pub loss: f64,
    pub steps: Option<u64>,
    pub tokens: Option<u64>,
}

impl TrainOutcome {
    pub fn loss(loss: f64) -> Self {
        TrainOutcome {
            loss,
            steps: None,
            tokens: None,
        }
    }
}

/// Trains a proxy on a selection and reports its validation loss.
pub trait Trainer: Sync {
    /// Checked once before a campaign starts.
    fn probe(&self) -> Result<()> {
        Ok(())
    }

    fn train(&self, request: &TrainRequest<'_>) -> Result<TrainOutcome>;
}

impl<F> Trainer for F
where
    F: Fn(&TrainRequest<'_>) -> Result<TrainOutcome> + Sync,
{
    fn train(&self, request: &TrainRequest<'_>) -> Result<TrainOutcome> {
        self(request)
    }
}

impl Trainer for QuadraticOracle {
    fn train(&self, request: &TrainRequest<'_>) -> Result<TrainOutcome> {
        Ok(TrainOutcome::loss(self.loss(request.weights)))
    }
}

impl Trainer for SubsetOracle {
    fn train(&self, request: &TrainRequest<'_>) -> Result<TrainOutcome> {
        let mut out = TrainOutcome::loss(self.loss(request.selection)?);
        out.tokens = Some(request.selection.total_tokens);
        Ok(out)
    }
}

/// Runs `<program> <args…> --manifest M --config C [--valset V]` and reads a
/// JSON object with a numeric `loss` (optionally `steps`, `tokens`) from
/// stdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandTrainer {
    pub program: PathBuf,
    #[serde(default)]
    pub args: Vec<String>,
}

#[derive(Deserialize)]
struct CommandReply {
    loss: f64,
    steps: Option<u64>,
    tokens: Option<u64>,
}

impl CommandTrainer {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        CommandTrainer {
            program: program.into(),
            args: Vec::new(),
        }
    }

    fn resolve(&self) -> Option<PathBuf> {
        if self.program.components().count() > 1 {
            return self.program.is_file().then(|| self.program.clone());
        }
        std::env::var_os("PATH").and_then(|paths| {
            std::env::split_paths(&paths)
                .map(|dir| dir.join(&self.program))
                .find(|p| p.is_file())
        })
    }

    fn parse_reply(stdout: &str) -> Result<TrainOutcome> {
        let parsed: Option<CommandReply> = serde_json::from_str(stdout.trim())
            .ok()
            .or_else(|| stdout.lines().rev().find_map(|l| serde_json::from_str(l.trim()).ok()));
        let reply = parsed.ok_or_else(|| Error::Trainer("stdout carries no JSON object with `loss`".into()))?;
        if !reply.loss.is_finite() {
            return Err(Error::Trainer(format!("non-finite loss {}", reply.loss)));
        }
        Ok(TrainOutcome {
            loss: reply.loss,
            steps: reply.steps,
            tokens: reply.tokens,
        })
    }
}

impl Trainer for CommandTrainer {
    fn probe(&self) -> Result<()> {
        self.resolve()
            .map(|_| ())
            .ok_or_else(|| Error::Trainer(format!("trainer `{}` not found", self.program.display())))
    }

    fn train(&self, request: &TrainRequest<'_>) -> Result<TrainOutcome> {
        let manifest = request
            .manifest
            .ok_or_else(|| Error::Trainer("command trainers need a manifest directory".into()))?;
        let config = request
            .config_path
            .ok_or_else(|| Error::Trainer("command trainers need a config file".into()))?;
        let mut cmd = Command::new(&self.program);
        cmd.args(&self.args).arg("--manifest").arg(manifest).arg("--config").arg(config);
        if let Some(v) = request.valset {
            cmd.arg("--valset").arg(v);
        }
        let out = cmd
            .output()
            .map_err(|e| Error::Trainer(format!("cannot run `{}`: {e}", self.program.display())))?;
        if !out.status.success() {
            return Err(Error::Trainer(format!(
                "`{}` exited with {}: {}",
                self.program.display(),
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        CommandTrainer::parse_reply(&String::from_utf8_lossy(&out.stdout))
    }
}
