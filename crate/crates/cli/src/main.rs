//! `mmbounds`: finite-blocklength bounds and LDPC simulations for
//! pilot-aided short packets, written as CSV.

mod commands;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use spec::RunSpec;

#[derive(Debug, Parser)]
#[command(name = "mmbounds", version, about = "Bounds and simulations for short pilot-aided packets")]
struct Cli {
    /// Worker threads (all cores by default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with run parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Matched and averaged mismatched random-coding bound over an SNR grid.
    Grcb(RunSpec),
    /// Matched and averaged sphere-packing bound over an SNR grid (BPSK).
    Spb(RunSpec),
    /// Minimum Eb/N0 reaching the target for each preamble length.
    Tradeoff(RunSpec),
    /// Build the IRA code and simulate BLER per preamble length.
    Ldpc(RunSpec),
    /// Normal approximation over an SNR grid.
    NormalApprox(RunSpec),
    /// Write the CSV files of a pinned figure configuration.
    ReproduceFigure {
        /// Figure number: 2, 3, 4 or 5.
        figure: u8,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        /// Include the LDPC simulation in figure 3 (slow).
        #[arg(long)]
        with_ldpc: bool,
    },
}

fn run(cli: Cli) -> Result<commands::Outcome> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let file = match &cli.config {
        Some(path) => RunSpec::from_file(path)?,
        None => RunSpec::default(),
    };
    match cli.command {
        Command::Grcb(s) => commands::grcb(&s.over(file)),
        Command::Spb(s) => commands::spb(&s.over(file)),
        Command::Tradeoff(s) => commands::tradeoff(&s.over(file)),
        Command::Ldpc(s) => commands::ldpc(&s.over(file)),
        Command::NormalApprox(s) => commands::normal_approx(&s.over(file)),
        Command::ReproduceFigure { figure, output_dir, with_ldpc } => {
            commands::reproduce_figure(figure, &output_dir, with_ldpc)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) if out.failures.is_empty() => ExitCode::SUCCESS,
        Ok(out) => {
            for f in &out.failures {
                eprintln!("failed: {f}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
