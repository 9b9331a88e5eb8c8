//! Command-line front end: config ingestion, subcommand dispatch and run
//! directories.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use commands::{execute, Kind};
use error::{CliError, CliResult};
use output::{fmt_f64, now, RunDir, RunManifest, DEFAULT_OUT, OUT_ENV};

#[derive(Debug, Parser)]
#[command(name = "dickman", version, about = "Generalized Dickman distributions: numerics, sampling, limits, simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Config file (TOML or JSON), or a manifest.json of an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output root; defaults to $DICKMAN_OUT, then ./out.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tables of x, ρ_θ, p_θ and F_θ.
    Density,
    /// GD or GD^(X) sample batch.
    Sample,
    /// Limit verdict for a schedule pair or a shuffle scheme.
    Classify,
    /// Monte Carlo simulation of W_n over an n-grid.
    Simulate,
    /// Inversion counts of the insertion shuffle.
    Inversions,
    /// Smooth-number counts against ρ(s).
    Smooth,
    /// Run the acceptance suite and print a pass/fail table.
    Verify {
        /// Comma-separated criterion numbers; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs the acceptance criteria, writing `verify.csv` and a manifest.
/// Returns the outcomes; the caller decides the exit status.
pub fn verify(out: &Path, seed: u64, only: &[u32]) -> CliResult<Vec<acceptance::Outcome>> {
    let ids: Vec<u32> = if only.is_empty() { acceptance::CRITERIA.iter().map(|(i, _)| *i).collect() } else { only.to_vec() };
    let dir = RunDir::reserve(out, "verify", seed)?;
    dir.create()?;
    let started_at = now();
    let mut outcomes = Vec::new();
    for id in ids {
        let outcome = acceptance::run(id, seed, &dir.path().join("work"))?;
        println!("{}", outcome.line());
        outcomes.push(outcome);
    }
    let rows = outcomes.iter().map(|o| {
        vec![o.id.to_string(), o.name.to_string(), o.passed.to_string(), o.detail.clone(), fmt_f64(o.seconds)]
    });
    dir.write_csv("verify.csv", &["criterion", "name", "passed", "detail", "seconds"], rows)?;
    let config = serde_json::json!({ "criteria": outcomes.iter().map(|o| o.id).collect::<Vec<_>>() });
    let manifest = RunManifest {
        subcommand: "verify",
        config: &config,
        master_seed: seed,
        version: env!("CARGO_PKG_VERSION"),
        started_at,
        finished_at: now(),
    };
    dir.write_json("manifest.json", &manifest)?;
    Ok(outcomes)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    let out = out_root(cli.out);
    let kind = match cli.command {
        Command::Verify { only } => {
            if cli.config.is_some() {
                return Err(CliError::Validation("verify takes no --config".into()));
            }
            let outcomes = verify(&out, cli.seed.unwrap_or(acceptance::ACCEPTANCE_SEED), &only)?;
            let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
            if !failed.is_empty() {
                return Err(CliError::Failed(format!("acceptance criteria failed: {failed:?}")));
            }
            return Ok(());
        }
        Command::Density => Kind::Density,
        Command::Sample => Kind::Sample,
        Command::Classify => Kind::Classify,
        Command::Simulate => Kind::Simulate,
        Command::Inversions => Kind::Inversions,
        Command::Smooth => Kind::Smooth,
    };
    let config = cli.config.ok_or_else(|| CliError::Validation(format!("{} requires --config", kind.name())))?;
    let report = execute(kind, &config, &out, cli.seed)?;
    println!("{}", report.summary);
    println!("wrote {}", report.dir.display());
    Ok(())
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
