use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ddlab::lab::{parse_config_with, run_command, write_outputs, Command};

/// Self-similar profiles and regularized K(2,2) simulations.
#[derive(Debug, Parser)]
#[command(name = "ddlab", version)]
struct Cli {
    /// One of: shoot, mu-star, profile, scaling-table, sweep, converge,
    /// compacton-check, diagnose.
    command: Command,
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving one timestamped subdirectory per invocation.
    #[arg(long, default_value = "ddlab-out")]
    out: PathBuf,
    /// Concurrent runs (defaults to the number of CPUs).
    #[arg(long)]
    jobs: Option<usize>,
    /// Permit delta = 0; the unregularized equation is ill-posed and runs
    /// may blow up at the grid scale.
    #[arg(long)]
    allow_delta_zero: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let spec = match parse_config_with(cli.command, &text, cli.allow_delta_zero) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    if spec.allow_delta_zero && spec.params.delta == Some(0.0) {
        eprintln!("warning: delta = 0 solves the unregularized equation, which is ill-posed; results may blow up");
    }
    let jobs = cli.jobs.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    let output = match run_command(&spec, jobs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let dir = match write_outputs(&cli.out, &spec, &output) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    print!("{}", output.summary);
    println!("outputs: {}", dir.display());
    if output.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &output.failures {
            eprintln!("failure: {f}");
        }
        eprintln!("{} failure(s)", output.failures.len());
        ExitCode::from(1)
    }
}
