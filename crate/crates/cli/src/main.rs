use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isar3d_cli::{acceptance, run_analyze, run_simulate, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "isar3d", version, about = "Ship motion, pose and length from ISAR target reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dwell from a scenario and analyze it.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analyze a saved dwell file.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance checks.
    Selftest,
}

fn run(cmd: Command) -> Result<(), RunError> {
    match cmd {
        Command::Simulate { config, out } => {
            let report = run_simulate(&RunConfig::load(&config)?, &out)?;
            println!("wrote {} products to {}", report.manifest.len() + 1, out.display());
        }
        Command::Analyze { input, config, out } => {
            let cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::default(),
            };
            let report = run_analyze(&input, &cfg, &out)?;
            println!("wrote {} products to {}", report.manifest.len() + 1, out.display());
        }
        Command::Selftest => {
            let results = acceptance::run_all();
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.pass).count();
            println!("{} of {} criteria passed", results.len() - failed, results.len());
            if failed > 0 {
                std::process::exit(4);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
