//! `varinv`: symbolic tools for the inverse problem of the calculus of
//! variations, driven by problem files.

mod commands;
mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use commands::{run, CaseFlag, Command, Settings};
use problem::ProblemFile;
use report::{Failure, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "varinv", version, about = "Euler-Lagrange expressions, Helmholtz conditions and Lagrangian reconstruction")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Problem file of `key = expression` lines.
    problem: PathBuf,
    #[arg(long, value_enum)]
    case: Option<CaseFlag>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample points per zero test.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    ansatz_degree: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = Settings {
        case: cli.case,
        seed: cli.seed,
        samples: cli.samples,
        quad_order: cli.quad_order,
        ansatz_degree: cli.ansatz_degree,
    };
    let name = cli.command.name();
    let report = std::fs::read_to_string(&cli.problem)
        .map_err(|source| Failure::Io { path: cli.problem.display().to_string(), source })
        .and_then(|src| ProblemFile::parse(&src).map_err(Failure::from))
        .map(|pf| run(cli.command, &pf, &settings))
        .unwrap_or_else(|e| Report::error(name, &e));
    match cli.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", report.to_json()),
    }
    if report.verdict == "error" {
        if let Some(d) = report.diagnostics.last() {
            eprintln!("varinv {name}: {d}");
        }
    }
    ExitCode::from(report.exit as u8)
}
