//! `nodal`: reproducible experiments on nodal sets of Gaussian fields.
//!
//! Every command reads one JSON config; flags only set the seed, the worker
//! count and the output directory. Exit codes: 0 success, 2 a failed
//! condition or estimate, 64 a usage or config error.

mod commands;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Core(#[from] nodal::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// The command ran but its verdict is negative.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use nodal::Error as E;
        match self {
            CliError::Usage(_) | CliError::Json(_) => 64,
            CliError::Core(E::InvalidMeasure(_) | E::InvalidParameter(_) | E::UnsupportedOrder(_) | E::Format(_)) => 64,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "nodal", version, about = "Nodal-component statistics of smooth Gaussian random fields")]
struct Cli {
    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: NODAL_WORKERS, else all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for result files; without it results go to stdout only.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check conditions (ρ1)–(ρ4) for a spectral measure.
    CheckSpectrum { config: PathBuf },
    /// Draw one field sample and write it in the binary format.
    Sample { config: PathBuf },
    /// Zero-set census of one field, with its stability certificate.
    Census {
        config: PathBuf,
        /// Also write the cell label grid as a field file.
        #[arg(long)]
        dump_labels: bool,
    },
    /// Monte Carlo estimate of ν with the Φ/Ψ bracket.
    EstimateNu { config: PathBuf },
    /// The (R, L) table of the double-scaling limit.
    DoubleScaling { config: PathBuf },
    /// Total component counts of Kostlan polynomials on S².
    KostlanTotal { config: PathBuf },
    /// ν of a transformed field against |det T| times ν of the base.
    DetScaling { config: PathBuf },
    /// Sup-distance between scaled kernels and their limit.
    KernelConverge { config: PathBuf },
    /// Check the sandwich bounds on random fields.
    SandwichAudit { config: PathBuf },
}

fn workers(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("NODAL_WORKERS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Usage(format!("NODAL_WORKERS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = workers(cli.workers)? {
        if n == 0 {
            return Err(CliError::Usage("worker count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let ctx = commands::Context { seed: cli.seed, sink: output::Sink { dir: cli.out } };
    match cli.command {
        Command::CheckSpectrum { config } => commands::check_spectrum(&ctx, &config),
        Command::Sample { config } => commands::sample(&ctx, &config),
        Command::Census { config, dump_labels } => commands::census(&ctx, &config, dump_labels),
        Command::EstimateNu { config } => commands::estimate_nu(&ctx, &config),
        Command::DoubleScaling { config } => commands::double_scaling(&ctx, &config),
        Command::KostlanTotal { config } => commands::kostlan_total(&ctx, &config),
        Command::DetScaling { config } => commands::det_scaling(&ctx, &config),
        Command::KernelConverge { config } => commands::kernel_converge(&ctx, &config),
        Command::SandwichAudit { config } => commands::sandwich_audit(&ctx, &config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nodal: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
