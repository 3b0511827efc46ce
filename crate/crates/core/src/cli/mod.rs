//! Batch front end: `amenable-entropy <verb> --config PATH [flags]`.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_decompose, cmd_entropy, cmd_folner, cmd_rate, cmd_verify, write_atomic, Context, Failure,
    RunOptions, EXIT_OK, EXIT_RESOURCE, EXIT_VALIDATION, EXIT_VIOLATION,
};
pub use config::{
    build_system, BuiltSystem, Configurable, ConditioningConfig, ExperimentConfig, FolnerConfig,
    LogBase, PartitionConfig, Schedule, SetFunctionConfig, SubAlgebraConfig, SystemConfig,
    VerifyConfig, SCHEMA_VERSION,
};

#[derive(Debug, Parser)]
#[command(name = "amenable-entropy", version, about = "Conditional entropy of Z^d actions")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Verb {
    /// H(α) and H(α|β) on a finite space, or one window of a shift
    Entropy,
    /// Følner entropy-rate trace
    Rate,
    /// Seeded property checks
    Verify,
    /// Rate decomposition over a fixed partition
    Decompose,
    /// Invariance defects of the Følner boxes
    Folner,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Flags {
    /// Experiment config (JSON)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report entropies in bits
    #[arg(long, global = true)]
    pub bits: bool,
    /// Rate convergence tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Ceiling on enumerated window patterns
    #[arg(long, global = true)]
    pub max_window: Option<u64>,
}

/// Run one verb; returns the process exit code, printing failures as JSON.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            println!("{}", f.body);
            f.code
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, Failure> {
    let path = cli.flags.config.as_ref().ok_or_else(|| {
        Failure::from(crate::Error::InvalidSystem("--config is required".into()))
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure::from(crate::Error::InvalidSystem(format!(
            "config {}: {e}",
            path.display()
        )))
    })?;
    let cfg = ExperimentConfig::parse(&text)?;
    let opts = RunOptions {
        out: cli.flags.out.clone(),
        bits: cli.flags.bits,
        tol: cli.flags.tol,
        seed: cli.flags.seed,
        trials: cli.flags.trials,
        max_window: cli.flags.max_window,
    };
    let ctx = Context::new(cfg, opts)?;
    match cli.verb {
        Verb::Entropy => cmd_entropy(&ctx),
        Verb::Rate => cmd_rate(&ctx),
        Verb::Verify => cmd_verify(&ctx),
        Verb::Decompose => cmd_decompose(&ctx),
        Verb::Folner => cmd_folner(&ctx),
    }
}
