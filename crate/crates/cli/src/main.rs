mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rellich_core::{LabError, Precision};

use report::RunReport;

pub const PRECISION_ENV: &str = "RELLICH_LAB_PRECISION";

#[derive(Debug, Parser)]
#[command(name = "rellich-lab", version, about = "Numerical experiments for discrete Hardy and Rellich inequalities")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Arithmetic for the computation (f64 or ext).
    #[arg(long, global = true, env = PRECISION_ENV, value_parser = parse_precision)]
    precision: Option<Precision>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for randomized commands; recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    s.parse().map_err(|e: LabError| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the weight of order k against its leading term.
    Weights(commands::WeightsArgs),
    /// Compute the order-two factorization coefficients and check them.
    Factorize(commands::FactorizeArgs),
    /// Randomized checks.
    #[command(subcommand)]
    Verify(commands::VerifyCommand),
    /// Cut-off sequence experiments.
    #[command(subcommand)]
    Optimality(commands::OptimalityCommand),
    /// Exact combinatorial identities and series coefficients.
    #[command(subcommand)]
    Combinatorics(commands::CombinatoricsCommand),
    /// Truncated generalized eigenvalue problems.
    #[command(subcommand)]
    Spectral(commands::SpectralCommand),
}

pub struct Context {
    pub precision: Option<Precision>,
    pub seed: u64,
}

impl Context {
    pub fn precision_or(&self, default: Precision) -> Precision {
        self.precision.unwrap_or(default)
    }
}

/// Failure that ends the run before a report exists.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check(String),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::BoundViolation { .. } | LabError::ZeroDenominator => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let ctx = Context { precision: cli.global.precision, seed: cli.global.seed };
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Weights(a) => commands::weights(a, &ctx),
        Command::Factorize(a) => commands::factorize(a, &ctx),
        Command::Verify(c) => commands::verify(c, &ctx),
        Command::Optimality(c) => commands::optimality(c, &ctx),
        Command::Combinatorics(c) => commands::combinatorics(c, &ctx),
        Command::Spectral(c) => commands::spectral(c, &ctx),
    };
    let mut rep: RunReport = match outcome {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            return ExitCode::from(2);
        }
    };
    rep.wall_time_ms = start.elapsed().as_millis() as u64;
    let text = match cli.global.format {
        Format::Json => rep.render_json(),
        Format::Csv => rep.render_csv(),
    };
    match &cli.global.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    for c in rep.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} ({})", c.name, c.detail);
    }
    if rep.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
