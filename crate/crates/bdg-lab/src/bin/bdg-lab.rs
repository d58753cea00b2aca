use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bdg_lab::report::{list_catalog, run, ExperimentConfig, ARTIFACT_VERSION};

#[derive(Parser)]
#[command(name = "bdg-lab", about = "Stopped-martingale Monte Carlo laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiments described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's path count.
        #[arg(long)]
        n_paths: Option<usize>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the catalog of random-time identifiers.
    ListCatalog,
    /// Print the artifact version.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, n_paths, out } => {
            let mut cfg = match ExperimentConfig::from_file(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = n_paths {
                cfg.n_paths = n;
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            match run(&cfg) {
                Ok(report) => {
                    println!(
                        "wrote {} result blocks to {}",
                        report.results.len(),
                        cfg.output_dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::ListCatalog => {
            print!("{}", list_catalog());
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("bdg-lab {ARTIFACT_VERSION}");
            ExitCode::SUCCESS
        }
    }
}
