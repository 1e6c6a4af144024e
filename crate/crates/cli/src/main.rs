use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hforge_cli::{run_file, CliError, RunOptions};

#[derive(Parser)]
#[command(
    name = "hforge",
    version,
    about = "Build and verify hyper-Kähler metrics from potentials and twistor data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a JSON config.
    Run {
        config: PathBuf,
        /// Directory for the CSV table and JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Pass threshold on the maximum residual; overrides the config.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Print nothing on success.
        #[arg(long)]
        quiet: bool,
    },
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("HFORGE_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("HFORGE_THREADS must be a positive integer, got `{v}`"))),
    }
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        out,
        tolerance,
        quiet,
    } = Cli::parse().command;
    let outcome = threads_from_env().and_then(|threads| {
        run_file(
            &config,
            &RunOptions {
                out_dir: out,
                tolerance,
                threads,
                base_dir: None,
            },
        )
    });
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let s = &report.summary;
    if !quiet {
        println!("{}", report.header.join(","));
        for row in &report.rows {
            println!("{}", row.join(","));
        }
        for p in [&report.csv_path, &report.report_path].into_iter().flatten() {
            println!("wrote {}", p.display());
        }
    }
    if !quiet || !s.pass {
        println!(
            "{}: {} rows from {} points, max residual {:e} (tolerance {:e}) in {:.3}s: {}",
            report.task,
            s.rows,
            s.points,
            s.max_residual,
            s.tolerance,
            s.runtime_seconds,
            if s.pass { "PASS" } else { "FAIL" }
        );
    }
    if s.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
