use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qremlab_cli::{commands, CliError};

#[derive(Parser)]
#[command(name = "qremlab", version, about = "Noisy variational-circuit training laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one configured training run and write its artifacts.
    Run {
        /// TOML (or JSON) run configuration.
        config: PathBuf,
        /// Output root (defaults to $QREMLAB_OUT or the working directory).
        #[arg(long)]
        out_root: Option<PathBuf>,
    },
    /// Summarize MSE values across artifact directories.
    Compare {
        /// Directories containing artifacts.json.
        dirs: Vec<PathBuf>,
    },
    /// Run the rtqem config once per drift threshold with shared seeds.
    SweepThreshold {
        /// rtqem run configuration with a [walk] section.
        config: PathBuf,
        /// Comma-separated thresholds (e.g. "0,0.05,0.1,0.2" or "inf").
        #[arg(long, value_delimiter = ',')]
        eps: Vec<String>,
        #[arg(long)]
        out_root: Option<PathBuf>,
    },
}

fn parse_eps(values: &[String]) -> Result<Vec<f64>, CliError> {
    values
        .iter()
        .map(|v| {
            let v = v.trim();
            if v.eq_ignore_ascii_case("inf") || v.eq_ignore_ascii_case("infinity") {
                Ok(f64::INFINITY)
            } else {
                v.parse::<f64>()
                    .map_err(|e| CliError::Config(format!("bad threshold '{v}': {e}")))
            }
        })
        .collect()
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out_root } => {
            let dir = commands::run(&config, out_root.as_deref())?;
            println!("wrote artifacts to {}", dir.display());
            Ok(())
        }
        Command::Compare { dirs } => {
            let table = commands::compare(&dirs)?;
            print!("{table}");
            Ok(())
        }
        Command::SweepThreshold { config, eps, out_root } => {
            let thresholds = parse_eps(&eps)?;
            let summary = commands::sweep_threshold(&config, &thresholds, out_root.as_deref())?;
            for entry in &summary.entries {
                println!(
                    "eps = {:>8}: relearned {:>3} times, final noiseless loss {:.6} ({})",
                    entry.epsilon_ell,
                    entry.relearn_count,
                    entry.final_noiseless_loss,
                    entry.output_dir
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
