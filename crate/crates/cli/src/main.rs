//! `primwalk`: command-line front end for the primwalk library.
//!
//! Every command accepts `--config FILE` (TOML, see [`config`]), writes its
//! outputs plus a `<stem>.manifest.json` into `--out` (default
//! `$PRIMWALK_OUT_DIR`, else `./primwalk-out`) and exits with 0 on success,
//! 1 on invalid input and 2 when a computation fails.

mod args;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use primwalk::{Parallelism, WalkError};

use args::*;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or inputs; exit code 1.
    Validation(String),
    /// A computation or I/O failure; exit code 2.
    Runtime(String),
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "failed: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "primwalk", version, about = "Random walks on primitive lattice points")]
struct Cli {
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory [default: $PRIMWALK_OUT_DIR or ./primwalk-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; 1 runs on the calling thread. Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Norm histogram of one long trajectory, set up like the published figure panels
    Figure(FigureArgs),
    /// Streaming statistics of one trajectory
    Walk(WalkArgs),
    /// Monte Carlo law of the position after n steps
    Endpoint(EndpointArgs),
    /// Monte Carlo Cesàro average of the first n endpoint laws
    Cesaro(CesaroArgs),
    /// Return times to the start point
    Returns(ReturnsArgs),
    /// Occupation frequency times mean return time
    Kac(KacArgs),
    /// Mean endpoint norms and the fitted contraction
    Drift(DriftArgs),
    /// Mass of the recurrence ball 2M'/ε over a step grid
    Recurrence(RecurrenceArgs),
    /// Covering word and E[U_n] on the discrete torus
    TorusEu(TorusEuArgs),
    /// Chernoff tail experiment for torus hit counts
    Chernoff(ChernoffArgs),
    /// Stationary law of the box-truncated chain
    OracleStationary(OracleStationaryArgs),
    /// Exact expected return time on the truncated chain
    OracleReturns(OracleReturnsArgs),
    /// Strongly connected components of the truncated chain
    OracleScc(OracleSccArgs),
    /// Exact cone masses under the full-gcd and coprime-to-k walks
    ConeCheck(ConeCheckArgs),
    /// Validate a measure and run its assumption checks
    CheckMeasure(CheckMeasureArgs),
    /// Constructive path from the origin to a primitive target
    Connect(ConnectArgs),
}

pub struct Ctx {
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub par: Parallelism,
}

fn dispatch(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::Validation("--threads must be >= 1".into()));
    }
    let ctx = Ctx {
        out: output::out_dir(cli.out.as_deref()),
        threads: cli.threads,
        par: Parallelism::from_threads(cli.threads),
    };
    let file = cli.config.as_deref();
    use config::resolve;
    match cli.command {
        Command::Figure(a) => commands::figure(resolve(&a, file)?, &ctx),
        Command::Walk(a) => commands::walk(resolve(&a, file)?, &ctx),
        Command::Endpoint(a) => commands::endpoint(resolve(&a, file)?, &ctx),
        Command::Cesaro(a) => commands::cesaro(resolve(&a, file)?, &ctx),
        Command::Returns(a) => commands::returns(resolve(&a, file)?, &ctx),
        Command::Kac(a) => commands::kac(resolve(&a, file)?, &ctx),
        Command::Drift(a) => commands::drift(resolve(&a, file)?, &ctx),
        Command::Recurrence(a) => commands::recurrence(resolve(&a, file)?, &ctx),
        Command::TorusEu(a) => commands::torus_eu(resolve(&a, file)?, &ctx),
        Command::Chernoff(a) => commands::chernoff(resolve(&a, file)?, &ctx),
        Command::OracleStationary(a) => commands::oracle_stationary(resolve(&a, file)?, &ctx),
        Command::OracleReturns(a) => commands::oracle_returns(resolve(&a, file)?, &ctx),
        Command::OracleScc(a) => commands::oracle_scc(resolve(&a, file)?, &ctx),
        Command::ConeCheck(a) => commands::cone_check(resolve(&a, file)?, &ctx),
        Command::CheckMeasure(a) => commands::check_measure(resolve(&a, file)?, &ctx),
        Command::Connect(a) => commands::connect(resolve(&a, file)?, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Validation(_) => ExitCode::from(1),
                CliError::Runtime(_) => ExitCode::from(2),
            }
        }
    }
}
