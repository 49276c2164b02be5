#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl From<qualmix::Error> for CliError {
    fn from(e: qualmix::Error) -> Self {
        if e.is_validation() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Invalid(_) => "validation",
            CliError::Runtime(_) => "runtime",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qualmix", version, about = "Quality-score data selection and mixture search")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Corpus shards; overrides the config.
    #[arg(long = "corpus", global = true)]
    pub corpus: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute signals and importance scores and merge model ratings.
    Annotate {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Select the top documents per domain under a weight vector.
    Select {
        #[arg(long)]
        weights: PathBuf,
        /// Take the whole budget from CommonCrawl.
        #[arg(long)]
        cc_only: bool,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run (or resume) a proxy campaign.
    Campaign {
        #[arg(long)]
        experiments: Option<usize>,
    },
    /// Fit the loss regressor on a campaign log and search for the best weights.
    Fit {
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Spearman correlations between score columns.
    Correlate,
    /// Training FLOPs; the reference table when no sizes are given.
    Cost(commands::CostArgs),
    /// Write a synthetic scored corpus.
    Synth {
        #[arg(long)]
        documents: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Cost(args) = &cli.command {
        return commands::cost(args);
    }
    let mut config = config::RunConfig::load(cli.global.config.as_deref())?;
    let g = cli.global;
    if let Some(s) = g.seed {
        config.seed = s;
    }
    if let Some(t) = g.threads {
        config.threads = t;
    }
    if let Some(d) = g.output_dir {
        config.output_dir = d;
    }
    if !g.corpus.is_empty() {
        config.corpus.paths = g.corpus;
    }
    qualmix::exec::set_threads(config.threads);
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", config.output_dir.display())))?;

    match cli.command {
        Command::Annotate { output } => commands::annotate(&config, output),
        Command::Select {
            weights,
            cc_only,
            budget,
        } => {
            if let Some(b) = budget {
                config.plan.token_budget = b;
            }
            commands::select(&config, &weights, cc_only)
        }
        Command::Campaign { experiments } => {
            if let Some(n) = experiments {
                config.campaign.experiments = n;
            }
            commands::campaign(&config)
        }
        Command::Fit { log } => {
            if log.is_some() {
                config.optimizer.log = log;
            }
            commands::fit(&config)
        }
        Command::Correlate => commands::correlate(&config),
        Command::Synth { documents, output } => {
            if let Some(n) = documents {
                config.synth.documents = n;
            }
            commands::synth(&config, output)
        }
        Command::Cost(_) => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let body = serde_json::json!({ "error": "validation", "message": e.kind().to_string() });
            eprintln!("{body}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(e.code())
        }
    }
}
