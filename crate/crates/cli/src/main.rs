use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaudin_cli::config::{Overrides, Precision};

#[derive(Parser)]
#[command(name = "gaudin-lab", version, about = "Run and replay Gaudin algebra verification experiments")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for report.json and spectra CSVs.
        #[arg(long)]
        out: PathBuf,
        /// Override every experiment's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        precision: Option<Precision>,
    },
    /// Re-run the config recorded in a report and compare results.
    Replay { report: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("{}", gaudin_cli::error_record("usage", "invalid --threads"));
            return ExitCode::from(gaudin_cli::EXIT_USAGE as u8);
        }
    }
    let code = match cli.command {
        Command::Run { config, out, seed, precision } => gaudin_cli::run_command(&config, &out, &Overrides { seed, precision }),
        Command::Replay { report } => gaudin_cli::replay_command(&report),
    };
    ExitCode::from(code as u8)
}
