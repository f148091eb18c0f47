//! Batch runner for scenario files.
//!
//! Exit status: 0 on success, 1 when the scenario fails validation, 2 when a
//! computation or the output write fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use irs_thz::scenario::{run_scenario, validate_file, RunOptions, EXIT_OK, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "irs-sim", version, about = "Near-field IRS link experiments from scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV.
    Run {
        file: PathBuf,
        /// Directory for the scenario's output file.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Worker threads for sweep points (default: all cores).
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        threads: Option<u16>,
    },
    /// Check a scenario and list every problem without running it.
    Validate { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { file, out_dir, threads } => {
            let options = RunOptions {
                out_dir,
                threads: threads.map(usize::from),
            };
            match run_scenario(&file, &options) {
                Ok(outcome) => {
                    println!("wrote {} ({} rows)", outcome.output.display(), outcome.table.rows.len());
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    e.exit_code()
                }
            }
        }
        Command::Validate { file } => {
            let diagnostics = validate_file(&file);
            for d in &diagnostics {
                eprintln!("{}: {d}", file.display());
            }
            if diagnostics.is_empty() {
                println!("{}: ok", file.display());
                EXIT_OK
            } else {
                EXIT_VALIDATION
            }
        }
    };
    ExitCode::from(code as u8)
}
