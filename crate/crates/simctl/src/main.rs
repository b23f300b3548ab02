use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use simctl::{run, validate, Diagnostics, ExperimentConfig, SimError};

#[derive(Parser)]
#[command(name = "simctl", version, about = "Run lattice gauge simulation experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print dimension estimates, derived couplings and diagnostics.
    Validate { config: PathBuf },
    /// Run the experiment and write its report bundle.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn fail(e: &SimError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => {
            let diag = match load(&config) {
                Ok(cfg) => validate(&cfg),
                Err(e) => Diagnostics::unparsed(e.to_string()),
            };
            println!("{}", serde_json::to_string_pretty(&diag).expect("diagnostics serialize"));
            if diag.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Command::Run { config, out, threads } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match run(&cfg, &out, threads) {
                Ok(o) => {
                    for f in &o.files {
                        println!("{}", out.join(f).display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}
