use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use twisted_xxx::cli::{execute, parse_config, Command};

/// Numerical checks for the twisted XXX spin-1/2 chain.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration value, e.g. `--set chain.sites=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Include the wall time in the report (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let start = Instant::now();
    let cfg = match parse_config(&args.config, &args.overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut report = match execute(args.command, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {} failed: {e}", args.command);
            return ExitCode::from(1);
        }
    };
    if args.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let json = report.to_json();
    match &args.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{json}"),
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}", c.name);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
