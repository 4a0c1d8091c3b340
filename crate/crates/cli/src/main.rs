use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cpree_cli::{run_file, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "cpree", version, about = "Monte Carlo experiments for the contact process in an evolving environment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Master seed (overrides the config and CPREE_SEED).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        workers: Option<usize>,
        /// Output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, workers, out } => {
            run_file(&config, &Overrides { seed, workers, out }).map(|(resolved, outcome)| {
                println!(
                    "{} [{}] seed={} -> {}: {}",
                    resolved.config.experiment.name(),
                    resolved.digest,
                    resolved.master_seed,
                    resolved.output_path.display(),
                    outcome.summary
                );
            })
        }
        Command::Validate { config } => ExperimentConfig::load(&config)
            .and_then(|c| c.resolve(&Overrides::default()))
            .map(|r| println!("ok: {} [{}]", r.config.experiment.name(), r.digest)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cpree: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
