//! Executes a configured experiment: expands the grid, dispatches
//! *(cell, trial)* tasks to a worker pool, canonicalizes the record order,
//! and renders the report stream.
//!
//! Determinism contract: the rendered text depends only on the config and
//! seed — tasks carry their stream index, results are sorted by it before
//! rendering, and nothing time- or schedule-dependent enters the output
//! (wall time is the caller's concern and goes to stderr, not the report).

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use nclp_core::{io, CheckReport, RunSummary, SquareMatrix};

use crate::checks::{grid, run_trial, stream_index, TrialOutput};
use crate::config::{ExperimentConfig, ReportFormat};

#[derive(Debug)]
pub enum RunError {
    /// A trial hit an infrastructure failure (bad sample, I/O, …) — this
    /// aborts the run; mathematical failures are failing records instead.
    Check(nclp_core::Error),
    Pool(rayon::ThreadPoolBuildError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Check(e) => write!(f, "trial aborted: {e}"),
            RunError::Pool(e) => write!(f, "could not build worker pool: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<nclp_core::Error> for RunError {
    fn from(e: nclp_core::Error) -> Self {
        RunError::Check(e)
    }
}

/// A finished run: canonical record list, its aggregate, and the rendered
/// report exactly as it is written to the output.
pub struct RunOutcome {
    pub reports: Vec<CheckReport>,
    pub summary: RunSummary,
    pub report_text: String,
    /// Paths of artifact files written for failing trials.
    pub artifact_paths: Vec<PathBuf>,
}

pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let cells = grid(config);
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();

    let run_all = || -> Result<Vec<(u64, TrialOutput)>, nclp_core::Error> {
        tasks
            .par_iter()
            .map(|&(c, t)| {
                run_trial(config, c, &cells[c], t)
                    .map(|out| (stream_index(config, c, t), out))
            })
            .collect()
    };
    let mut outputs = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(RunError::Pool)?
            .install(run_all),
        None => run_all(),
    }?;
    // Indexed parallel collects already preserve order; sorting by stream
    // makes the canonical order explicit rather than incidental.
    outputs.sort_by_key(|(stream, _)| *stream);

    let mut artifact_paths = Vec::new();
    for (stream, out) in &outputs {
        if !out.artifacts.is_empty() {
            let dir = artifacts_dir(config.out.as_deref());
            artifact_paths.extend(write_artifacts(&dir, *stream, &out.artifacts)?);
        }
    }

    let reports: Vec<CheckReport> = outputs
        .into_iter()
        .flat_map(|(_, out)| out.reports)
        .collect();
    let summary = RunSummary::from_reports(&reports);
    let report_text = match config.format {
        ReportFormat::Json => render_json(&reports, &summary),
        ReportFormat::Csv => render_csv(&reports, &summary),
    };
    Ok(RunOutcome {
        reports,
        summary,
        report_text,
        artifact_paths,
    })
}

/// Directory for failing-trial inputs: `<out stem>-artifacts/` beside the
/// report file, or `./nclp-artifacts` when reporting to stdout.
fn artifacts_dir(out: Option<&Path>) -> PathBuf {
    match out {
        Some(path) => {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("nclp");
            path.with_file_name(format!("{stem}-artifacts"))
        }
        None => PathBuf::from("nclp-artifacts"),
    }
}

/// Writes one failing trial's inputs as matrix JSON files named by the
/// trial's RNG stream, so the exact instance can be reloaded and replayed.
pub(crate) fn write_artifacts(
    dir: &Path,
    stream: u64,
    artifacts: &[(&'static str, SquareMatrix)],
) -> Result<Vec<PathBuf>, nclp_core::Error> {
    fs::create_dir_all(dir).map_err(|e| nclp_core::Error::MalformedData {
        reason: format!("cannot create artifact directory {}: {e}", dir.display()),
    })?;
    let mut paths = Vec::with_capacity(artifacts.len());
    for (stem, matrix) in artifacts {
        let path = dir.join(format!("trial{stream:06}-{stem}.json"));
        io::write_matrix(&path, matrix)?;
        paths.push(path);
    }
    Ok(paths)
}

fn render_json(reports: &[CheckReport], summary: &RunSummary) -> String {
    let mut text = String::new();
    for report in reports {
        text.push_str(&report.to_json_line());
        text.push('\n');
    }
    text.push_str(&summary.to_json_line());
    text.push('\n');
    text
}

fn render_csv(reports: &[CheckReport], summary: &RunSummary) -> String {
    let mut text =
        String::from("check_name,inputs_digest,lhs,rhs,slack,tolerance,verdict,seed,p_q_params\n");
    for r in reports {
        let params = r
            .p_q_params
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let verdict = if r.passed() { "pass" } else { "fail" };
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            r.check_name, r.inputs_digest, r.lhs, r.rhs, r.slack, r.tolerance, verdict, r.seed,
            params
        );
    }
    let _ = writeln!(
        text,
        "summary,{},{},{}",
        summary.pass_count, summary.fail_count, summary.max_violation
    );
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CheckKind, RawConfig};
    use nclp_core::digest_matrices;

    fn small(check: CheckKind, format: &str) -> ExperimentConfig {
        let raw = RawConfig {
            trials: Some(3),
            dims: Some(vec![2, 4]),
            format: Some(format.into()),
            jobs: Some(2),
            ..RawConfig::default()
        };
        ExperimentConfig::build(check, raw).unwrap()
    }

    #[test]
    fn identical_configs_render_identical_bytes() {
        let config = small(CheckKind::SchurHalf, "json");
        let a = execute(&config).unwrap();
        let b = execute(&config).unwrap();
        assert_eq!(a.report_text, b.report_text);
        assert!(a.artifact_paths.is_empty());
    }

    #[test]
    fn json_stream_ends_with_consistent_summary() {
        let config = small(CheckKind::DiscretizeSandwich, "json");
        let outcome = execute(&config).unwrap();
        let lines: Vec<&str> = outcome.report_text.lines().collect();
        // 2 cells × 3 trials × 2 records each, plus the summary line.
        assert_eq!(lines.len(), 13);
        assert!(lines.last().unwrap().contains("pass_count"));
        assert_eq!(outcome.summary.pass_count, 12);
        assert_eq!(outcome.summary.fail_count, 0);
    }

    #[test]
    fn csv_has_header_and_summary_row() {
        let config = small(CheckKind::Balance, "csv");
        let outcome = execute(&config).unwrap();
        let lines: Vec<&str> = outcome.report_text.lines().collect();
        assert!(lines[0].starts_with("check_name,"));
        assert!(lines.last().unwrap().starts_with("summary,"));
        assert_eq!(lines.len(), 2 + outcome.reports.len());
    }

    #[test]
    fn jobs_setting_does_not_change_output() {
        let serial = {
            let mut c = small(CheckKind::Lambda, "json");
            c.jobs = Some(1);
            execute(&c).unwrap().report_text
        };
        let parallel = {
            let mut c = small(CheckKind::Lambda, "json");
            c.jobs = Some(4);
            execute(&c).unwrap().report_text
        };
        assert_eq!(serial, parallel);
    }

    #[test]
    fn artifacts_are_written_and_reloadable() {
        let dir = tempfile::tempdir().unwrap();
        let m = SquareMatrix::identity(3);
        let paths =
            write_artifacts(dir.path(), 42, &[("density", m.clone()), ("x", m.clone())]).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(paths[0].file_name().unwrap().to_str().unwrap().starts_with("trial000042-"));
        for p in &paths {
            let back = io::read_matrix(p).unwrap();
            assert_eq!(digest_matrices(&[&back]), digest_matrices(&[&m]));
        }
    }
}
