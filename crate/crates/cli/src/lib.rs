//! Batch driver for `cpree-core`: reads a JSON experiment config, runs it
//! on a worker pool of the requested size and writes the results.
//!
//! Artifacts of a run with output path `out`:
//!
//! * `out`: the result CSV (or the JSON report for `field`).
//! * `out.series.csv`: long-format `series, x, y, ci_low, ci_high`.

pub mod config;
pub mod experiments;
pub mod output;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind, Overrides, Resolved};
pub use experiments::{execute, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("run failed: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

pub fn series_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".series.csv");
    PathBuf::from(name)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Runs the experiment on a pool of `run.workers` threads and writes its
/// artifacts. Returns the outcome for callers that want the numbers.
pub fn run(run: &Resolved) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.workers)
        .build()
        .map_err(|e| CliError::Runtime(format!("worker pool: {e}")))?;
    // Fail on an unwritable destination before spending time simulating.
    let main = create(&run.output_path)?;
    let outcome = pool.install(|| execute(run))?;
    match &outcome.report {
        Some(report) => serde_json::to_writer_pretty(main, report)
            .map_err(|e| CliError::Runtime(format!("writing report: {e}")))?,
        None => output::write_rows(&outcome.rows, &run.digest, run.master_seed, main)?,
    }
    output::emit_series(&outcome.series, create(&series_path(&run.output_path))?)?;
    Ok(outcome)
}

/// Loads, validates and runs a config file.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<(Resolved, Outcome), CliError> {
    let resolved = ExperimentConfig::load(path)?.resolve(overrides)?;
    let outcome = run(&resolved)?;
    Ok((resolved, outcome))
}
