use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hilbund::config::{Overrides, Suite};
use hilbund::output::emit_tables;

#[derive(Debug, Parser)]
#[command(name = "hilbund", version, about = "Run Hilbert bundle check scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the suites of one scenario; exit 0 if every check passes, 1 if any fails, 2 on a config error.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run only these suites (repeatable); overrides the config file.
        #[arg(long = "suite", value_enum)]
        suites: Vec<Suite>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write CSV tables into this directory.
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Grid points on every axis.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        quad_nodes: Option<usize>,
        /// Record suite wall times in the report, which makes it run-dependent.
        #[arg(long)]
        timings: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        config,
        suites,
        report,
        tables,
        seed,
        grid,
        quad_nodes,
        timings,
    } = cli.command;
    let overrides = Overrides {
        suites,
        seed,
        grid,
        quad_nodes,
    };
    let outcome = match hilbund::run_path(&config, &overrides, timings) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    print!("{}", outcome.report.summary());
    if let Some(path) = report {
        if let Err(e) = outcome.report.write(&path) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    if let Some(dir) = tables {
        if let Err(e) = emit_tables(&dir, &outcome.report, &outcome.tables) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(outcome.exit_code() as u8)
}
