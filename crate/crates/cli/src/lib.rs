//! Batch runner: reads a task configuration, evaluates the task over its grid
//! and emits a report plus an optional CSV table.

pub mod config;
pub mod error;
pub mod table;
pub mod tasks;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::TaskConfig;
pub use error::CliError;
use table::{Cell, Table};
use tasks::{Row, Source};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for the CSV and report; defaults to the config's directory
    /// for paths named in the config, and to no output otherwise.
    pub out_dir: Option<PathBuf>,
    pub tolerance: Option<f64>,
    pub threads: Option<usize>,
    /// Directory that relative output paths in the config resolve against.
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: TaskConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub pass: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub points: usize,
    pub rows: usize,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub task: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Summary,
    pub provenance: Provenance,
    #[serde(skip)]
    pub csv_path: Option<PathBuf>,
    #[serde(skip)]
    pub report_path: Option<PathBuf>,
}

impl Report {
    pub fn table(&self) -> Table {
        Table {
            header: self.header.clone(),
            rows: self.rows.clone(),
        }
    }
}

pub fn run_file(path: &Path, options: &RunOptions) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config = TaskConfig::from_json(&text, &path.display().to_string())?;
    let mut options = options.clone();
    if options.base_dir.is_none() {
        options.base_dir = path.parent().map(Path::to_path_buf);
    }
    run(&config, &options)
}

pub fn run(config: &TaskConfig, options: &RunOptions) -> Result<Report, CliError> {
    let start = Instant::now();
    let (task, inputs) = tasks::build(config)?;
    let grid = config.grid()?;
    let sources = inputs.binding(&grid.vars)?;
    let tolerance = match options.tolerance {
        Some(t) => t,
        None => config.params().f64("tolerance", DEFAULT_TOLERANCE)?,
    };

    let evaluate = |index: usize| -> Result<(Vec<Cell>, Vec<Row>), CliError> {
        let g = grid.point(index);
        let point: Vec<_> = sources
            .iter()
            .map(|s| match *s {
                Source::Grid(j) => g[j],
                Source::Fixed(v) => v,
            })
            .collect();
        let rows = task
            .evaluate(&point)
            .map_err(|source| CliError::Compute { index, source })?;
        Ok((g.into_iter().map(Cell::Complex).collect(), rows))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    // collect keeps grid order whatever the completion order
    let results: Vec<_> = pool.install(|| (0..grid.len()).into_par_iter().map(evaluate).collect::<Result<_, _>>())?;

    let mut header = grid.vars.clone();
    header.extend(task.columns());
    header.push("residual".into());
    let mut table = Table::new(header);
    let mut max_residual: f64 = 0.0;
    for (coords, rows) in results {
        for row in rows {
            max_residual = tasks::worst(max_residual, row.residual);
            let mut cells = coords.clone();
            cells.extend(row.cells);
            cells.push(Cell::Real(row.residual));
            table.push(&cells);
        }
    }

    let (csv_path, report_path) = output_paths(config, options);
    let mut report = Report {
        task: config.task.clone(),
        summary: Summary {
            pass: max_residual <= tolerance,
            max_residual,
            tolerance,
            points: grid.len(),
            rows: table.rows.len(),
            runtime_seconds: start.elapsed().as_secs_f64(),
        },
        header: table.header,
        rows: table.rows,
        provenance: Provenance {
            tool: "hforge",
            version: env!("CARGO_PKG_VERSION"),
            config: config.clone(),
        },
        csv_path,
        report_path,
    };
    write_outputs(&mut report)?;
    Ok(report)
}

fn output_paths(config: &TaskConfig, options: &RunOptions) -> (Option<PathBuf>, Option<PathBuf>) {
    let out = &config.output;
    match &options.out_dir {
        Some(dir) => (
            Some(dir.join(out.csv.clone().unwrap_or_else(|| format!("{}.csv", config.task)))),
            Some(dir.join(out.report.clone().unwrap_or_else(|| "report.json".into()))),
        ),
        None => {
            let base = options.base_dir.clone().unwrap_or_default();
            (
                out.csv.as_ref().map(|p| base.join(p)),
                out.report.as_ref().map(|p| base.join(p)),
            )
        }
    }
}

fn write_outputs(report: &mut Report) -> Result<(), CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    let create = |p: &Path| -> Result<std::fs::File, CliError> {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        std::fs::File::create(p).map_err(|e| io(p, e))
    };
    if let Some(p) = &report.csv_path {
        report.table().write(create(p)?)?;
    }
    if let Some(p) = &report.report_path {
        let f = create(p)?;
        serde_json::to_writer_pretty(f, &*report).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}
