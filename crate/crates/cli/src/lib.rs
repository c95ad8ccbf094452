//! Command-line front end for `szego-core`: config-driven predictions,
//! r-sweeps, spectrum dumps and the verification batteries.
//!
//! Exit codes: 0 on success, 1 on a validation or usage error, 2 on a
//! numerical failure.

pub mod config;
pub mod runner;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use verify::Suite;

/// Overrides the output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "SZEGO_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] szego_core::Error),
    #[error("numerical failure: {0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) | CliError::Failed(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "szego", version, about = "Trace asymptotics of dilated localisation operators")]
pub struct Cli {
    /// Worker threads for r-sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write A₀, A₁ and the two-term prediction for each r.
    Predict {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure each r, fit the sweep and compare with the prediction.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the eigenvalues for one r.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dilation; the first entry of `r_list` if unset.
        #[arg(long)]
        r: Option<f64>,
    },
    /// Run a verification battery and print a JSON pass/fail report.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional config whose `seed` drives the randomised checks.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs one command and returns the files it wrote.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Predict { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            runner::run_predict(&cfg, &out_dir(out, Some(&cfg)))
        }
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            runner::run_sweep(&cfg, &out_dir(out, Some(&cfg)))
        }
        Command::Spectrum { config, out, r } => {
            let cfg = ExperimentConfig::load(&config)?;
            runner::run_spectrum(&cfg, r, &out_dir(out, Some(&cfg)))
        }
        Command::Verify { suite, out, config } => {
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            let seed = cfg.as_ref().map_or(0, |c| c.seed);
            let report = verify::run_verify(suite, seed);
            let json = serde_json::to_string_pretty(&report).expect("report is serialisable");
            println!("{json}");
            let mut written = Vec::new();
            if out.is_some() || std::env::var_os(OUT_DIR_ENV).is_some() {
                let dir = out_dir(out, cfg.as_ref());
                std::fs::create_dir_all(&dir)?;
                let path = dir.join("verify.json");
                std::fs::write(&path, json + "\n")?;
                written.push(path);
            }
            Ok(written)
        }
    }
}
