//! `nclp` — seeded verification harness for the matrix-algebra L_p
//! toolkit.
//!
//! Exit codes: `0` — run completed with every record passing; `1` — run
//! completed but some record failed; `2` — configuration, argument, or
//! I/O error before/while running.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use nclp_cli::config::{CheckKind, ExperimentConfig, RawConfig};
use nclp_cli::generate::{self, GenKind, MapKind};
use nclp_cli::runner;
use nclp_core::PNorm;

#[derive(Parser)]
#[command(
    name = "nclp",
    version,
    about = "Numerical certification harness for matrix-algebra L_p constructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named check over its parameter grid and emit a report stream.
    Check(CheckArgs),
    /// Embed a basis of matrices and report round-trip and distortion data.
    Construct(ConstructArgs),
    /// Probe the operator norm of a block map by random ascent.
    EstimateNorm(EstimateNormArgs),
    /// Generate one seeded random matrix.
    Gen(GenArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Check name, e.g. `schur-half` (see `--help` of the parent for the list).
    name: String,
    /// JSON config file with the same fields as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Matrix dimensions to sweep (repeatable).
    #[arg(long = "dim")]
    dim: Vec<usize>,
    /// p-exponent grid; `inf` is accepted (repeatable).
    #[arg(long = "p")]
    p: Vec<String>,
    /// q-exponent grid (repeatable).
    #[arg(long = "q")]
    q: Vec<String>,
    /// r-exponent grid (repeatable).
    #[arg(long = "r")]
    r: Vec<String>,
    /// η / weight-power grid (repeatable).
    #[arg(long = "eta")]
    eta: Vec<f64>,
    /// t / base-point grid (repeatable).
    #[arg(long = "t")]
    t: Vec<f64>,
    /// Trials per grid cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed; NCLP_SEED is the fallback.
    #[arg(long, env = "NCLP_SEED")]
    seed: Option<u64>,
    /// Grid coarseness for discretize-sandwich (rejected elsewhere).
    #[arg(long)]
    tol: Option<f64>,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
    /// Report format: `json` (newline-delimited records) or `csv`.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct ConstructArgs {
    /// JSON manifest {"vectors": [paths]} relative to its own directory.
    #[arg(long)]
    basis: PathBuf,
    /// Density file; a heuristic density is built from the basis if absent.
    #[arg(long)]
    density: Option<PathBuf>,
    #[arg(long, default_value = "1")]
    q: String,
    #[arg(long, default_value = "1.5")]
    p: String,
    /// Distortion-sampling trials.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, env = "NCLP_SEED", default_value_t = 0)]
    seed: u64,
    /// Directory for the embedded images and the density used.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateNormArgs {
    /// Block map to probe: min, max, resolvent, or triangular.
    #[arg(long)]
    map: String,
    #[arg(long, default_value = "2")]
    p: String,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, env = "NCLP_SEED", default_value_t = 0)]
    seed: u64,
    /// Resolvent interpolation parameter (ignored by the other maps).
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// hermitian, psd, density, or upper_triangular.
    kind: String,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, env = "NCLP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check(args) => run_check(args),
        Command::Construct(args) => run_construct(args),
        Command::EstimateNorm(args) => run_estimate_norm(args),
        Command::Gen(args) => run_gen(args),
    }
}

fn none_if_empty<T>(v: Vec<T>) -> Option<Vec<T>> {
    if v.is_empty() {
        None
    } else {
        Some(v)
    }
}

fn run_check(args: CheckArgs) -> Result<ExitCode, String> {
    let check: CheckKind = args.name.parse().map_err(|e| format!("{e}"))?;
    let flags = RawConfig {
        check_name: Some(args.name),
        dims: none_if_empty(args.dim),
        p: none_if_empty(args.p),
        q: none_if_empty(args.q),
        r: none_if_empty(args.r),
        eta: none_if_empty(args.eta),
        t: none_if_empty(args.t),
        trials: args.trials,
        seed: args.seed,
        tol: args.tol,
        out: args.out,
        jobs: args.jobs,
        format: args.format,
    };
    let layered = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
            flags.or(RawConfig::from_json(&text).map_err(|e| format!("{e}"))?)
        }
        None => flags,
    };
    let config = ExperimentConfig::build(check, layered).map_err(|e| format!("{e}"))?;

    let started = Instant::now();
    let outcome = runner::execute(&config).map_err(|e| format!("{e}"))?;
    let wall_time = started.elapsed().as_secs_f64();

    emit(config.out.as_deref(), &outcome.report_text)?;
    // Wall time is part of the run summary but must not enter the report
    // stream: byte-identical output per config+seed is contractual.
    eprintln!(
        "summary: pass={} fail={} max_violation={:.3e} wall_time={:.3}s",
        outcome.summary.pass_count, outcome.summary.fail_count, outcome.summary.max_violation,
        wall_time
    );
    for path in &outcome.artifact_paths {
        eprintln!("artifact: {}", path.display());
    }
    Ok(if outcome.summary.fail_count == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_exponent(field: &str, raw: &str) -> Result<PNorm, String> {
    raw.parse::<PNorm>()
        .map_err(|e| format!("invalid {field} exponent `{raw}`: {e}"))
}

fn run_construct(args: ConstructArgs) -> Result<ExitCode, String> {
    let q = parse_exponent("q", &args.q)?;
    let p = parse_exponent("p", &args.p)?;
    if args.trials == 0 {
        return Err("invalid config field `trials`: must be at least 1".into());
    }
    let record = generate::construct(
        &args.basis,
        args.density.as_deref(),
        q,
        p,
        args.trials,
        args.seed,
        args.out.as_deref(),
    )
    .map_err(|e| format!("{e}"))?;
    let line = serde_json::to_string(&record).map_err(|e| format!("cannot encode record: {e}"))?;
    println!("{line}");
    Ok(ExitCode::SUCCESS)
}

fn run_estimate_norm(args: EstimateNormArgs) -> Result<ExitCode, String> {
    let map: MapKind = args.map.parse().map_err(|e| format!("{e}"))?;
    let p = parse_exponent("p", &args.p)?;
    let record = generate::estimate_norm(map, p, args.dim, args.trials, args.seed, args.eta)
        .map_err(|e| format!("{e}"))?;
    let line = serde_json::to_string(&record).map_err(|e| format!("cannot encode record: {e}"))?;
    match args.out.as_deref() {
        Some(path) => emit(Some(path), &format!("{line}\n"))?,
        None => println!("{line}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_gen(args: GenArgs) -> Result<ExitCode, String> {
    let kind: GenKind = args.kind.parse().map_err(|e| format!("{e}"))?;
    if args.dim < 1 {
        return Err("invalid config field `dim`: must be at least 1".into());
    }
    let matrix = generate::generate(kind, args.dim, args.seed).map_err(|e| format!("{e}"))?;
    let text = nclp_core::io::matrix_to_json(&matrix);
    emit(args.out.as_deref(), &format!("{text}\n"))
        .map(|_| ExitCode::SUCCESS)
}

/// Writes the fully rendered text to the path, or stdout when absent.
fn emit(out: Option<&std::path::Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| format!("cannot write report to {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
