//! Command-line front end: single computations, table reproduction,
//! certificate verification, and SDPA exports.
//!
//! Exit codes: 0 success, 2 solver failure, 3 invalid input, 4 failed
//! verification check, 5 I/O error.  The log level is read from the
//! `CHEBY_LOG` environment variable.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cheby_core::CoreError;

#[derive(Parser)]
#[command(
    name = "cheby",
    about = "Best uniform-norm approximation of monomials on compact semialgebraic domains",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the best-approximation error for one monomial exponent.
    Compute(ComputeArgs),
    /// Reproduce the table of canonical exponents for a domain.
    Table(TableArgs),
    /// Verify a closed-form certificate (polynomial, signature, norms).
    Verify(VerifyArgs),
    /// Write a moment relaxation in SDPA sparse format.
    ExportSdpa(ExportArgs),
    /// Look up the known closed-form value for an exponent.
    ClosedForm(ClosedFormArgs),
}

#[derive(Args)]
struct ComputeArgs {
    /// Exponent as comma-separated nonnegative integers, e.g. 2,2,1.
    #[arg(long)]
    k: String,
    /// Domain name: ball | cross | simplex | hypercube.
    #[arg(long)]
    domain: String,
    /// First relaxation level (default: the admissibility threshold).
    #[arg(long)]
    t_min: Option<u32>,
    /// Last relaxation level (default: t_min + 3).
    #[arg(long)]
    t_max: Option<u32>,
    /// Accept levels below the threshold.
    #[arg(long)]
    force_level: bool,
    /// Output format.
    #[arg(long, default_value = "json")]
    format: String,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<String>,
    /// Seed for the extraction's random shift combination.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write the first level's moment relaxation in SDPA format.
    #[arg(long)]
    export_sdpa: Option<String>,
}

#[derive(Args)]
struct TableArgs {
    /// Domain name: ball | cross | simplex | hypercube.
    #[arg(long)]
    domain: String,
    /// Largest total degree to enumerate.
    #[arg(long, default_value_t = 6)]
    n_max: u32,
    /// First relaxation level override (applies to every entry).
    #[arg(long)]
    t_min: Option<u32>,
    /// Last relaxation level override.
    #[arg(long)]
    t_max: Option<u32>,
    /// Output format.
    #[arg(long, default_value = "text")]
    format: String,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<String>,
    /// Seed for the extraction's random shift combination.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for concurrent table entries.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: ball-221, simplex-211, hypercube:K, ball2d:K, simplex2d:K
    /// with K a comma-separated exponent, e.g. hypercube:3,2,1.
    name: String,
    /// Output format.
    #[arg(long, default_value = "text")]
    format: String,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ExportArgs {
    /// Exponent as comma-separated nonnegative integers.
    #[arg(long)]
    k: String,
    /// Domain name.
    #[arg(long)]
    domain: String,
    /// Relaxation level (default: the admissibility threshold).
    #[arg(long)]
    t: Option<u32>,
    /// Output path.
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct ClosedFormArgs {
    /// Exponent as comma-separated nonnegative integers.
    #[arg(long)]
    k: String,
    /// Domain name.
    #[arg(long)]
    domain: String,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<String>,
}

/// Failure carrying the documented process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: msg.into(),
        }
    }
    pub fn solver(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: msg.into(),
        }
    }
    pub fn verification(msg: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: msg.into(),
        }
    }
    pub fn io(msg: impl Into<String>) -> Self {
        CliError {
            code: 5,
            message: msg.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidArgument(_)
            | CoreError::DimensionMismatch(_)
            | CoreError::LevelTooSmall { .. }
            | CoreError::BlockTooLarge { .. }
            | CoreError::Format(_) => CliError::invalid(e.to_string()),
            CoreError::Solver(_)
            | CoreError::MissingMoment(_)
            | CoreError::RootFinding(_)
            | CoreError::ExtractionFailed(_)
            | CoreError::AmbiguousSignature(_) => CliError::solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CHEBY_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(args) => commands::compute(args),
        Command::Table(args) => commands::table(args),
        Command::Verify(args) => commands::verify(args),
        Command::ExportSdpa(args) => commands::export_sdpa(args),
        Command::ClosedForm(args) => commands::closed_form(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
