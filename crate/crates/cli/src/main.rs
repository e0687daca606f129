use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use slope_nav_cli::{execute, Command};

/// Slippery-cross-slope navigation: convexity bounds, indicatrices, speed
/// profiles, geodesic fans and time fronts.
#[derive(Debug, Parser)]
#[command(name = "slope-nav", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the scenario's output.path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 when the scenario is not strongly convex.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args.command, &args.config, args.out.as_deref(), args.strict) {
        Ok(report) => {
            for line in &report.outcome.summary {
                println!("{line}");
            }
            for file in &report.files {
                println!("wrote {}", file.display());
            }
            for w in &report.outcome.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(v) = &report.outcome.strict_violation {
                eprintln!("error: strict convexity check failed: {v}");
            }
            ExitCode::from(report.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
