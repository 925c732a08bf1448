use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use oamsim::circuit::{parse_circuit, run_circuit, tally, verify, CircuitSpec, RunOptions, VerifyOptions};

/// Exit codes: 0 pass, 2 verification failure, 1 error.
#[derive(Parser)]
#[command(name = "oamsim", version, about = "Run and verify OAM multiplexing circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a circuit file and print the run report.
    Run {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include wall-clock duration (reports are then no longer reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Compare a pipeline circuit with its closed-form oracle.
    Verify {
        file: PathBuf,
        /// Sweep every basis operand pair (adder, multiplier).
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the gate tally and the expected counts.
    Tally {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &Path) -> Result<CircuitSpec, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_circuit(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_atomic(path: &Path, text: &str) -> Result<(), String> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).and_then(|_| fs::rename(&tmp, path)).map_err(|e| format!("{}: {e}", path.display()))
}

fn execute(command: Command) -> Result<u8, String> {
    match command {
        Command::Run { file, seed, out, timing } => {
            let spec = load(&file)?;
            let report = run_circuit(&spec, RunOptions { seed, timing }).map_err(|e| e.to_string())?;
            let json = report.to_json() + "\n";
            match out {
                Some(path) => write_atomic(&path, &json)?,
                None => print!("{json}"),
            }
            Ok(if report.vacuum_checks_pass() { 0 } else { 2 })
        }
        Command::Verify { file, exhaustive, seed } => {
            let spec = load(&file)?;
            let report = verify(&spec, VerifyOptions { exhaustive, seed }).map_err(|e| e.to_string())?;
            println!("{}", report.to_json());
            Ok(report.status.exit_code() as u8)
        }
        Command::Tally { file, seed } => {
            let spec = load(&file)?;
            let report = tally(&spec, seed).map_err(|e| e.to_string())?;
            println!("{}", report.to_json());
            Ok(if report.formulas_hold() { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
