//! Command-line experiments: config parsing, runs, CSV output, manifests
//! and the eigendecomposition cache.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod units;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};
pub use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "emission", version, about = "Spontaneous emission in the single-photon subspace")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact pseudo-1D decay and spectrum.
    Exact1d(RunArgs),
    /// Hydrogen atom in a rectangular box.
    Box3d(RunArgs),
    /// Periodic phase kicks on the pseudo-1D chain.
    Kicks(RunArgs),
    /// Two atoms sharing the pseudo-1D field.
    TwoAtom(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Eigendecomposition cache directory; falls back to $EMISSION_CACHE_DIR.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exact1d(_) => "exact1d",
            Self::Box3d(_) => "box3d",
            Self::Kicks(_) => "kicks",
            Self::TwoAtom(_) => "two-atom",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Self::Exact1d(a) | Self::Box3d(a) | Self::Kicks(a) | Self::TwoAtom(a) => a,
        }
    }
}

fn cache_dir(args: &RunArgs) -> Option<PathBuf> {
    args.cache.clone().or_else(|| std::env::var_os(cache::ENV_CACHE_DIR).map(PathBuf::from))
}

fn execute(command: &Command, text: &str, cache: Option<&Path>) -> CliResult<commands::Report> {
    match command {
        Command::Exact1d(_) => commands::exact1d(&config::Exact1dRun::parse(text)?),
        Command::Box3d(_) => commands::box3d(&config::Box3dRun::parse(text)?, cache),
        Command::Kicks(_) => commands::kicks(&config::KicksRun::parse(text)?, cache),
        Command::TwoAtom(_) => commands::two_atom(&config::TwoAtomRun::parse(text)?, cache),
    }
}

/// Run one experiment and write its tables and `manifest.json` into `--out`.
pub fn run(command: &Command) -> CliResult<RunManifest> {
    let args = command.args();
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let text = config::read_text(&args.config)?;
    let echo = config::echo(&text)?;
    if args.threads == Some(0) {
        return Err(CliError::config("--threads must be positive"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let cache = cache_dir(args);
    let report = pool.install(|| execute(command, &text, cache.as_deref()))?;

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let outputs = report
        .tables
        .iter()
        .map(|(name, table)| output::write_table(&args.out, name, table))
        .collect::<CliResult<Vec<_>>>()?;
    let manifest = RunManifest {
        experiment: command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_path: args.config.display().to_string(),
        config: echo,
        started_unix_seconds: started,
        wall_time_seconds: clock.elapsed().as_secs_f64(),
        threads,
        cache: report.cache.iter().map(|c| c.describe()).collect::<Vec<_>>().join("; "),
        outputs,
        results: report.results,
    };
    manifest.write(&args.out)?;
    Ok(manifest)
}
