use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qmatsim_cli::{execute, init_workers_from_env, Experiment};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Quench,
    Bcs,
    Correlate,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Quench => Experiment::Quench,
            Command::Bcs => Experiment::Bcs,
            Command::Correlate => Experiment::Correlate,
        }
    }
}

/// Statevector experiments: Néel quench, BCS gap solve, ancilla correlators.
#[derive(Debug, Parser)]
#[command(name = "qmatsim", version)]
struct Args {
    #[arg(value_enum)]
    experiment: Command,

    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Overrides `output` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = init_workers_from_env()
        .and_then(|_| execute(args.experiment.into(), &args.config, args.seed, args.out.as_deref()));
    match result {
        Ok(a) => {
            for p in a.files() {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qmatsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
