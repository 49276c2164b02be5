//! Proxy experiment campaigns: random simplex weights, selection, a trainer
//! call per experiment, and the resulting `(weights, loss)` log.

mod campaign;
pub mod flops;
mod oracle;
mod sampling;
mod trainer;

pub use campaign::{read_campaign_log, run_campaign, CampaignOutcome, CampaignSpec, ExperimentRecord, ExperimentStatus, TrainerMetadata};
pub use oracle::{oracle_loss, QuadraticOracle, SubsetOracle};
pub use sampling::{dirichlet_point, sample_simplex, sample_weights};
pub use trainer::{CommandTrainer, ProxyConfig, TrainOutcome, TrainRequest, Trainer};

/// Number of proxy experiments used by default.
pub const DEFAULT_EXPERIMENTS: usize = 256;
