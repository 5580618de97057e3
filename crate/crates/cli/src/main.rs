use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use disteer_cli::commands::{cmd_reproduce_fig3, cmd_selftest, cmd_simulate, cmd_verify};
use disteer_cli::config::{parse_triple, Format, Noise, Settings};
use disteer_cli::CliError;

/// Device-independent EPR-steering verification: sweeps, self-testing bounds
/// and simulated experiments.
#[derive(Parser)]
#[command(name = "disteer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Payoff and CHSH curves over a visibility grid.
    ReproduceFig3(Flags),
    /// Fidelity lower bounds from CHSH values or a counts file.
    Selftest(Flags),
    /// Simulate event counts and write a counts file.
    Simulate(Flags),
    /// Estimate the payoff with bootstrap error from a counts file.
    Verify(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// JSON file mirroring these flags; flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated visibilities, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    v_grid: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_triple)]
    fidelities: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    chsh: Option<[f64; 3]>,
    #[arg(long)]
    from_counts: Option<PathBuf>,
    /// Events per measurement setting.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    visibility: Option<f64>,
    #[arg(long)]
    bc_visibility: Option<f64>,
    #[arg(long, value_enum)]
    noise: Option<Noise>,
    #[arg(long)]
    yes_efficiency: Option<f64>,
}

impl Flags {
    fn settings(self) -> Result<Settings, CliError> {
        let flags = Settings {
            v_grid: self.v_grid,
            fidelities: self.fidelities,
            chsh: self.chsh,
            from_counts: self.from_counts,
            budget: self.budget,
            seed: self.seed,
            out: self.out,
            format: self.format,
            resamples: self.resamples,
            visibility: self.visibility,
            bc_visibility: self.bc_visibility,
            noise: self.noise,
            yes_efficiency: self.yes_efficiency,
        };
        match self.config {
            Some(path) => Ok(flags.or(Settings::load(&path)?)),
            None => Ok(flags),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ReproduceFig3(f) => cmd_reproduce_fig3(&f.settings()?),
        Command::Selftest(f) => cmd_selftest(&f.settings()?),
        Command::Simulate(f) => cmd_simulate(&f.settings()?),
        Command::Verify(f) => cmd_verify(&f.settings()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
