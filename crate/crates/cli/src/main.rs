use std::path::PathBuf;
use std::process::ExitCode;

use acqo::config::{RetrieverKind, RunConfig};
use acqo::error::Error;
use acqo::pipeline::{report, run_pipeline, EvalPolicy, Phase};
use clap::{Parser, Subcommand, ValueEnum};

/// Query-rewriting policy trainer: index, two-stage training, curriculum
/// filtering and evaluation.
#[derive(Parser)]
#[command(name = "acqo", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `policy.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `paths.output_dir`.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Overrides `retriever`.
    #[arg(long, global = true, value_enum)]
    retriever: Option<RetrieverArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RetrieverArg {
    Sparse,
    Dense,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Raw,
    Stage1,
    Stage2,
    Latest,
}

#[derive(Subcommand)]
enum Command {
    /// Build the retrieval index and validate the dataset.
    Index,
    /// Stage I training on every query.
    Stage1,
    /// Score query complexity and write the stage II curriculum.
    Curriculum,
    /// Stage II training on the curriculum.
    Stage2,
    /// Evaluate a policy checkpoint.
    Eval {
        #[arg(long, value_enum, default_value = "latest")]
        policy: PolicyArg,
    },
    /// Every phase in order, then evaluation of the final policy.
    All,
    /// Comparison table over the eval artifacts of a run directory.
    Report {
        /// Run directory; defaults to the configured output directory.
        dir: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config {
        field: "--config".into(),
        reason: "a configuration file is required".into(),
    })?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.policy.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.paths.output_dir = dir.clone();
    }
    if let Some(r) = cli.retriever {
        cfg.retriever = match r {
            RetrieverArg::Sparse => RetrieverKind::Sparse,
            RetrieverArg::Dense => RetrieverKind::Dense,
        };
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Vec<String>, Error> {
    let (phases, policy) = match &cli.command {
        Command::Report { dir } => {
            let dir = match (dir, &cli.output_dir) {
                (Some(d), _) | (None, Some(d)) => d.clone(),
                (None, None) => load_config(&cli)?.paths.output_dir,
            };
            return Ok(vec![report(&dir)?]);
        }
        Command::Index => (vec![Phase::Index], EvalPolicy::Latest),
        Command::Stage1 => (vec![Phase::Stage1], EvalPolicy::Latest),
        Command::Curriculum => (vec![Phase::Curriculum], EvalPolicy::Latest),
        Command::Stage2 => (vec![Phase::Stage2], EvalPolicy::Latest),
        Command::Eval { policy } => (
            vec![Phase::Eval],
            match policy {
                PolicyArg::Raw => EvalPolicy::Raw,
                PolicyArg::Stage1 => EvalPolicy::Stage1,
                PolicyArg::Stage2 => EvalPolicy::Stage2,
                PolicyArg::Latest => EvalPolicy::Latest,
            },
        ),
        Command::All => (
            vec![
                Phase::Index,
                Phase::Stage1,
                Phase::Curriculum,
                Phase::Stage2,
                Phase::Eval,
            ],
            EvalPolicy::Latest,
        ),
    };
    run_pipeline(load_config(&cli)?, &phases, policy)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(lines) => {
            for line in lines {
                println!("{}", line.trim_end());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "error[{}]: {}",
                e.category(),
                e.to_string().replace('\n', " ")
            );
            ExitCode::FAILURE
        }
    }
}
