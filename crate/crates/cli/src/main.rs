use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use condatom::{parse_scenario, run, Command, Options};

/// Exact checks of conditional atomlessness on fibered probability spaces.
#[derive(Debug, Parser)]
#[command(name = "condatom", version)]
struct Cli {
    /// One of: check, split, shrink, family, uniform, scan, kernel, densities, selftest.
    command: String,

    /// Scenario file (JSON). Optional for `selftest`.
    #[arg(long)]
    scenario: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    depth: Option<u32>,

    #[arg(long)]
    count: Option<usize>,

    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

const INPUT_ERROR: u8 = 2;

fn input_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("condatom: {message}");
    ExitCode::from(INPUT_ERROR)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(INPUT_ERROR);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let command: Command = match cli.command.parse() {
        Ok(c) => c,
        Err(e) => return input_error(e),
    };
    let scenario = match &cli.scenario {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return input_error(format!("cannot read {}: {e}", path.display())),
            };
            match parse_scenario(&text) {
                Ok(s) => Some(s),
                Err(e) => return input_error(format!("{}: {e}", path.display())),
            }
        }
        None => None,
    };
    let options = Options { seed: cli.seed, depth: cli.depth, count: cli.count };
    let report = match run(command, scenario.as_ref(), &options) {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    let text = report.to_json();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                return input_error(format!("cannot write {}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
