//! `ssf-lab`: command-line driver for spectral shift function experiments.
//!
//! Exit codes: 0 success, 2 config or argument validation failure, 3
//! numerical failure (the failing operation is named on stderr). Artifacts
//! are written atomically; diagnostics go to stderr only.

mod config;
mod experiments;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad config, flags, or environment. Exit 2.
    Validation(String),
    /// A pipeline failed to produce a number. Exit 3.
    Numerical(String),
}

impl CliError {
    pub fn field(name: &str, msg: &str) -> CliError {
        CliError::Validation(format!("config field {name}: {msg}"))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ssf-lab",
    version,
    about = "Spectral shift function laboratory: curves, convergence reports, and invariant checks"
)]
struct Cli {
    /// Worker threads (overrides SSF_LAB_THREADS; default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Progress diagnostics on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct JobArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Primary artifact path (CSV for curves, JSON for reports). Falls back
    /// to the config's out_csv / out_report, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelfcheckArgs {
    /// Optional run configuration (only the seed is consulted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report JSON path (PASS/FAIL lines print on stdout regardless).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a ξ curve by the pipeline named in the config; write CSV.
    Compute(JobArgs),
    /// Compute a counting-pipeline ξ curve on a finite domain; write CSV.
    Counting(JobArgs),
    /// Domain-growth convergence report: weak/vague tests, total masses,
    /// determinants.
    Converge(JobArgs),
    /// Cesàro averages of box counting curves at fixed λ.
    Cesaro(JobArgs),
    /// Green's function identity, limit, and monotonicity battery.
    KernelCheck(JobArgs),
    /// Built-in invariant battery; one PASS/FAIL line per invariant.
    Selfcheck(SelfcheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    let v = cli.verbose;
    match &cli.command {
        Command::Compute(a) => {
            let cfg = RunConfig::load(&a.config)?;
            experiments::run_compute(&cfg, a.out.as_deref(), false, v)
        }
        Command::Counting(a) => {
            let cfg = RunConfig::load(&a.config)?;
            experiments::run_compute(&cfg, a.out.as_deref(), true, v)
        }
        Command::Converge(a) => {
            let cfg = RunConfig::load(&a.config)?;
            experiments::run_converge(&cfg, a.out.as_deref(), v)
        }
        Command::Cesaro(a) => {
            let cfg = RunConfig::load(&a.config)?;
            experiments::run_cesaro(&cfg, a.out.as_deref(), v)
        }
        Command::KernelCheck(a) => {
            let cfg = RunConfig::load(&a.config)?;
            experiments::run_kernel_check(&cfg, a.out.as_deref(), v)
        }
        Command::Selfcheck(a) => {
            let cfg = match &a.config {
                Some(p) => Some(RunConfig::load(p)?),
                None => None,
            };
            experiments::run_selfcheck(cfg.as_ref(), a.out.as_deref(), v)
        }
    }
}

/// Thread count resolution: flag beats SSF_LAB_THREADS beats rayon default.
/// Output writing stays single-threaded regardless; this only sizes the
/// worker pool for per-λ and per-domain parallelism.
fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(0) => {
            return Err(CliError::Validation(
                "--threads must be at least 1".into(),
            ))
        }
        Some(n) => Some(n),
        None => match std::env::var("SSF_LAB_THREADS") {
            Ok(s) => match s.trim().parse::<usize>() {
                Ok(n) if n >= 1 => Some(n),
                _ => {
                    return Err(CliError::Validation(format!(
                        "SSF_LAB_THREADS must be a positive integer, got {s:?}"
                    )))
                }
            },
            Err(std::env::VarError::NotPresent) => None,
            Err(e) => {
                return Err(CliError::Validation(format!("SSF_LAB_THREADS: {e}")))
            }
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }
    Ok(())
}
