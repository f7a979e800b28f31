use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mfotl_cli::commands::{check, monitor, verify};
use mfotl_cli::CliError;

/// Monitor metric first-order temporal logic formulas over event logs.
#[derive(Parser)]
#[command(name = "mfotl", version)]
struct Cli {
    /// Print derived operators in their expanded form.
    #[arg(long, global = true)]
    no_sugar: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report the safety verdicts of a formula.
    Check {
        #[arg(short, long)]
        formula: String,
    },
    /// Stream a log through the monitor and print every satisfaction.
    Monitor {
        #[arg(short, long)]
        formula: String,
        /// Log file; standard input when absent.
        #[arg(short, long)]
        log: Option<PathBuf>,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare the monitor with the reference semantics on a log.
    Verify {
        #[arg(short, long)]
        formula: String,
        #[arg(short, long)]
        log: PathBuf,
    },
}

fn open_log(path: Option<&PathBuf>) -> io::Result<Box<dyn BufRead>> {
    Ok(match path {
        Some(p) => Box::new(BufReader::new(File::open(p)?)),
        None => Box::new(io::stdin().lock()),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    match cli.cmd {
        Cmd::Check { formula } => check(&formula, !cli.no_sugar, &mut stdout.lock()),
        Cmd::Monitor { formula, log, output } => {
            let log = open_log(log.as_ref())?;
            let mut out: Box<dyn Write> = match output {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(BufWriter::new(stdout.lock())),
            };
            monitor(&formula, log, &mut out)?;
            out.flush()?;
            Ok(())
        }
        Cmd::Verify { formula, log } => {
            verify(&formula, open_log(Some(&log))?, &mut stdout.lock()).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mfotl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
