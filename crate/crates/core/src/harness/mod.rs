//! Seeded Monte Carlo campaigns over the enumeration and the random
//! process, with flat-file output.
//!
//! Output files: `report.json`, `trials.csv` with columns
//! `trial,seed,husband_count,first_output_time,accept_pre_output,elapsed_us`,
//! and with plot data enabled `histogram.tsv` (`value<TAB>frequency`).
//! A size sweep writes `trials-n{n}.csv` and `histogram-n{n}.tsv` per size.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod config;
pub mod experiment;
pub mod summary;

pub use config::{ExperimentConfig, Kind, Method, OutputSpec, Sizes};
pub use experiment::{run_experiment, Detail, ExperimentReport, ExperimentRun, Gate, SizeReport};
pub use summary::{summarize, Summary, TrialResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("no trial results to summarize")]
    EmptyResults,
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const CSV_HEADER: &str =
    "trial,seed,husband_count,first_output_time,accept_pre_output,elapsed_us";

pub fn trials_csv(results: &[TrialResult]) -> String {
    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.trial,
            r.seed,
            r.husband_count,
            opt(r.first_output_time),
            opt(r.accept_pre_output),
            r.elapsed_us
        );
    }
    out
}

/// Writes the report, the per-trial CSV and optionally the plot TSV into
/// `dir`, returning the paths written.
pub fn write_outputs(
    run: &ExperimentRun,
    dir: &Path,
    plot_data: bool,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> std::io::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    put("report.json".into(), run.report.to_json())?;
    let sweep = run.trials.len() > 1;
    let name = |stem: &str, ext: &str, n: usize| {
        if sweep {
            format!("{stem}-n{n}.{ext}")
        } else {
            format!("{stem}.{ext}")
        }
    };
    for (size, report) in run.trials.iter().zip(&run.report.sizes) {
        put(name("trials", "csv", size.n), trials_csv(&size.results))?;
        if plot_data {
            put(
                name("histogram", "tsv", size.n),
                experiment::plot_rows(&report.summary.histogram),
            )?;
        }
    }
    Ok(written)
}
