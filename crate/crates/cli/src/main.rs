use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use darkpassage_cli::config::DarkStateRequest;
use darkpassage_cli::{cmd_darkstate, cmd_run, cmd_sweep, CliError};

/// Adiabatic dark-passage transfer through XY spin chains.
#[derive(Parser)]
#[command(name = "darkpassage", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run { config: PathBuf },
    /// Run a parameter sweep from a TOML config.
    Sweep { config: PathBuf },
    /// Print an analytic dark state.
    Darkstate(DarkStateArgs),
}

#[derive(Args)]
struct DarkStateArgs {
    #[arg(long, allow_negative_numbers = true)]
    k: f64,
    #[arg(long, allow_negative_numbers = true)]
    l: f64,
    /// Phase of the second bond (three-level chain only).
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["n", "straddle"])]
    alpha: Option<f64>,
    /// Alternating chain of 2n + 1 spins.
    #[arg(long, conflicts_with = "straddle")]
    n: Option<usize>,
    /// Straddle coupling M of an n_spins chain with bonds (K, M, ..., M, L).
    #[arg(long, requires = "spins")]
    straddle: Option<f64>,
    #[arg(long, requires = "straddle")]
    spins: Option<usize>,
}

impl DarkStateArgs {
    fn request(&self) -> DarkStateRequest {
        let (k, l) = (self.k, self.l);
        match (self.n, self.straddle, self.spins) {
            (Some(n), _, _) => DarkStateRequest::Alternating { n, k, l },
            (None, Some(m), Some(n_spins)) => DarkStateRequest::Straddled { n_spins, k, l, m },
            _ => DarkStateRequest::ThreeLevel { k, l, alpha: self.alpha.unwrap_or(0.0) },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result: Result<(), CliError> = match &cli.command {
        Command::Run { config } => cmd_run(config),
        Command::Sweep { config } => cmd_sweep(config),
        Command::Darkstate(args) => cmd_darkstate(&args.request()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("darkpassage: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
