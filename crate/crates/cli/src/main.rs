use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use mpsvqa_cli::{main_analyze, main_run, record, CliError, Overrides};

#[derive(Parser)]
#[command(name = "mpsvqa", version, about = "Rank-bounded MPS eigenvector search for black-box unitaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the k = 0..k_max sweep described by a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        shots: Option<usize>,
    },
    /// Audit the entanglement of an exported MPS or a run record.
    Analyze {
        path: PathBuf,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { config, seed, output, shots } => {
            let overrides = Overrides { seed, output, shots };
            let record = main_run(&config, &overrides).with_context(|| format!("run {}", config.display()))?;
            for k in &record.per_k {
                println!(
                    "k={} loss={:.6e} certificate={:.12} iterations={} wall={:.2}s",
                    k.k, k.loss, k.certificate, k.iterations, k.wall_time_s
                );
            }
            if let Some(reason) = &record.terminated_early {
                println!("stopped early: {reason}");
            }
            if let Some(o) = record.planted_overlap {
                println!("overlap with planted state: {o:.12}");
            }
            println!("best k = {}, record written to {}", record.best_k, record.config.output_path.display());
        }
        Command::Analyze { path, json } => {
            let analysis = main_analyze(&path).with_context(|| format!("analyze {}", path.display()))?;
            if json {
                print!("{}", record::to_json(&analysis));
            } else {
                print!("{}", analysis.render());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map(CliError::exit_code).unwrap_or(1);
            ExitCode::from(code)
        }
    }
}
