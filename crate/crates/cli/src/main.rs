use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use momap::Tolerances;
use momap_cli::commands;
use momap_cli::model_file::load_model;
use momap_cli::suites::{parse_suites, Suite};
use momap_cli::{CliError, Report, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "momap", version, about = "Momentum maps, symplectic slices and orbit-type strata")]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<String>,
    /// Omit the timing field from the printed report.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label a grid of slice points and audit the strata.
    Stratify {
        model: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Grid spacing.
        #[arg(long)]
        grid: Option<f64>,
    },
    /// Run verification suites on a model.
    Verify {
        model: String,
        /// Comma separated suite names; all suites when omitted.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample a fiber of the orbit-space relation map and write it as CSV.
    Fibers {
        #[arg(allow_negative_numbers = true)]
        y1: f64,
        #[arg(allow_negative_numbers = true)]
        y2: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        out: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Reproduce a built-in worked example.
    Example {
        name: ExampleName,
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleName {
    Su2su2,
}

fn run(cli: &Cli, tol: &Tolerances) -> Result<Report, CliError> {
    match &cli.command {
        Command::Stratify { model, seed, grid } => commands::stratify(&load_model(model)?, *seed, *grid, tol),
        Command::Verify { model, suite, seed } => {
            let suites = match suite {
                Some(list) => parse_suites(list)?,
                None => Suite::ALL.to_vec(),
            };
            Ok(commands::verify(&load_model(model)?, &suites, *seed, tol))
        }
        Command::Fibers { y1, y2, n, out, seed } => commands::fibers(*y1, *y2, *n, out, *seed, tol),
        Command::Example { name: ExampleName::Su2su2, full, seed } => commands::example_su2su2(*full, *seed, tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tolerances::from_env();
    let report = match run(&cli, &tol) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = if cli.no_timing {
        report.deterministic_json()
    } else {
        report.to_json()
    };
    println!("{text}");
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("error: cannot write {path}: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
