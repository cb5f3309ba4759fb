//! Experiment configuration: check names, parameter grids, and fail-fast
//! validation.
//!
//! A configuration is assembled in three layers — per-check defaults, then
//! an optional JSON config file, then command-line flags — and validated
//! once. Validation errors always name the offending field, so a bad grid
//! is caught before any trial runs. Exponents are written the way the
//! flags accept them (`"1.5"`, `"inf"`), in the config file as strings.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nclp_core::PNorm;
use serde::Deserialize;

/// Every runnable checker, named as the `check` subcommand accepts them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    SchurHalf,
    ResolventTriangular,
    QrIdentity,
    Lambda,
    Referee,
    DiffInequality,
    DiffIntegral,
    ArakiKosaki,
    Derivative,
    PositiveSplit,
    KernelPositivity,
    Balance,
    EmbeddingRoundtrip,
    DiscretizeSandwich,
}

impl CheckKind {
    pub const ALL: [CheckKind; 14] = [
        CheckKind::SchurHalf,
        CheckKind::ResolventTriangular,
        CheckKind::QrIdentity,
        CheckKind::Lambda,
        CheckKind::Referee,
        CheckKind::DiffInequality,
        CheckKind::DiffIntegral,
        CheckKind::ArakiKosaki,
        CheckKind::Derivative,
        CheckKind::PositiveSplit,
        CheckKind::KernelPositivity,
        CheckKind::Balance,
        CheckKind::EmbeddingRoundtrip,
        CheckKind::DiscretizeSandwich,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::SchurHalf => "schur-half",
            CheckKind::ResolventTriangular => "resolvent-triangular",
            CheckKind::QrIdentity => "qr-identity",
            CheckKind::Lambda => "lambda",
            CheckKind::Referee => "referee",
            CheckKind::DiffInequality => "diff-inequality",
            CheckKind::DiffIntegral => "diff-integral",
            CheckKind::ArakiKosaki => "araki-kosaki",
            CheckKind::Derivative => "derivative",
            CheckKind::PositiveSplit => "positive-split",
            CheckKind::KernelPositivity => "kernel-positivity",
            CheckKind::Balance => "balance",
            CheckKind::EmbeddingRoundtrip => "embedding-roundtrip",
            CheckKind::DiscretizeSandwich => "discretize-sandwich",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = CheckKind::ALL.iter().map(|k| k.name()).collect();
                ConfigError::new(
                    "check_name",
                    format!("unknown check `{s}`; expected one of {}", names.join(", ")),
                )
            })
    }
}

/// A rejected configuration, pointing at the field that caused it.
#[derive(Debug)]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(ConfigError::new(
                "format",
                format!("expected `json` or `csv`, got `{other}`"),
            )),
        }
    }
}

/// The raw, un-validated layer: every field optional, exactly the shape of
/// the `--config` JSON file and of the command-line flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub check_name: Option<String>,
    pub dims: Option<Vec<usize>>,
    pub p: Option<Vec<String>>,
    pub q: Option<Vec<String>>,
    pub r: Option<Vec<String>>,
    pub eta: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub format: Option<String>,
}

impl RawConfig {
    /// Later layers win field by field: `self` is kept where set, holes are
    /// filled from `base`.
    pub fn or(self, base: RawConfig) -> RawConfig {
        RawConfig {
            check_name: self.check_name.or(base.check_name),
            dims: self.dims.or(base.dims),
            p: self.p.or(base.p),
            q: self.q.or(base.q),
            r: self.r.or(base.r),
            eta: self.eta.or(base.eta),
            t: self.t.or(base.t),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            tol: self.tol.or(base.tol),
            out: self.out.or(base.out),
            jobs: self.jobs.or(base.jobs),
            format: self.format.or(base.format),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text)
            .map_err(|e| ConfigError::new("config", format!("config file did not parse: {e}")))
    }
}

/// A validated experiment: the check to run and the grids it will sweep.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub check: CheckKind,
    pub dims: Vec<usize>,
    pub ps: Vec<PNorm>,
    pub qs: Vec<PNorm>,
    pub rs: Vec<PNorm>,
    pub etas: Vec<f64>,
    pub ts: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Only `discretize-sandwich` has a free tolerance (its grid coarseness
    /// ε); every other check certifies a fixed constant and refuses this.
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub format: ReportFormat,
}

fn parse_exponents(field: &'static str, raw: &[String]) -> Result<Vec<PNorm>, ConfigError> {
    raw.iter()
        .map(|s| {
            s.parse::<PNorm>()
                .map_err(|e| ConfigError::new(field, format!("`{s}`: {e}")))
        })
        .collect()
}

fn to_strings(values: &[&str]) -> Vec<String> {
    values.iter().map(|s| s.to_string()).collect()
}

/// Per-check default grids. These mirror the certified claims: running a
/// check with no flags sweeps the full published grid.
fn defaults(check: CheckKind) -> RawConfig {
    let mut d = RawConfig {
        trials: Some(100),
        seed: Some(0),
        format: Some("json".into()),
        ..RawConfig::default()
    };
    match check {
        CheckKind::SchurHalf => {
            d.dims = Some(vec![2, 4, 8, 16]);
            d.p = Some(to_strings(&["1", "1.5", "2", "3", "inf"]));
        }
        CheckKind::ResolventTriangular => {
            d.dims = Some(vec![2, 4, 8, 16]);
            d.p = Some(to_strings(&["1", "1.5", "2", "3", "inf"]));
            d.eta = Some(vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        }
        CheckKind::QrIdentity => {
            d.dims = Some(vec![2, 4, 8]);
            d.r = Some(to_strings(&["1"]));
            d.p = Some(to_strings(&["1.5", "2", "3"]));
        }
        CheckKind::Lambda => {
            d.dims = Some(vec![2, 4, 8]);
            d.q = Some(to_strings(&["1", "2", "inf"]));
            d.eta = Some(vec![0.5, 1.0]);
        }
        CheckKind::Referee => {
            d.dims = Some(vec![2, 4, 8]);
            d.q = Some(to_strings(&["1", "2", "inf"]));
        }
        CheckKind::DiffInequality | CheckKind::DiffIntegral => {
            d.dims = Some(vec![2, 4, 6, 8]);
            d.p = Some(to_strings(&["2", "2.5", "3", "4", "6"]));
        }
        CheckKind::ArakiKosaki => {
            d.dims = Some(vec![2, 4, 6]);
            d.q = Some(to_strings(&["1", "2", "4"]));
            d.eta = Some(vec![0.1, 0.25, 0.5, 0.75, 0.9, 1.0]);
        }
        CheckKind::Derivative => {
            d.dims = Some(vec![2, 4, 6]);
            d.p = Some(to_strings(&["2.5", "3", "4"]));
            d.t = Some(vec![0.0, 0.3]);
        }
        CheckKind::PositiveSplit => {
            d.dims = Some(vec![2, 4, 6]);
            d.p = Some(to_strings(&["2", "3", "4"]));
            d.t = Some(vec![0.1, 1.0, 10.0]);
        }
        CheckKind::KernelPositivity => {
            d.dims = Some(vec![1]);
            d.trials = Some(1);
        }
        CheckKind::Balance => {
            d.dims = Some(vec![1]);
        }
        CheckKind::EmbeddingRoundtrip => {
            d.dims = Some(vec![2, 4, 8]);
            d.q = Some(to_strings(&["1", "1.2"]));
            d.p = Some(to_strings(&["1.25", "1.5", "1.75"]));
        }
        CheckKind::DiscretizeSandwich => {
            d.dims = Some(vec![2, 4, 8, 16]);
            d.tol = Some(0.05);
        }
    }
    d
}

impl ExperimentConfig {
    /// Applies defaults for `check` under `overrides`, then validates.
    pub fn build(check: CheckKind, overrides: RawConfig) -> Result<Self, ConfigError> {
        let raw = overrides.or(defaults(check));
        let dims = raw.dims.unwrap_or_default();
        let config = ExperimentConfig {
            check,
            dims,
            ps: parse_exponents("p", raw.p.as_deref().unwrap_or(&[]))?,
            qs: parse_exponents("q", raw.q.as_deref().unwrap_or(&[]))?,
            rs: parse_exponents("r", raw.r.as_deref().unwrap_or(&[]))?,
            etas: raw.eta.unwrap_or_default(),
            ts: raw.t.unwrap_or_default(),
            trials: raw.trials.unwrap_or(1),
            seed: raw.seed.unwrap_or(0),
            tol: raw.tol,
            out: raw.out,
            jobs: raw.jobs,
            format: raw.format.as_deref().unwrap_or("json").parse()?,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.trials < 1 {
            return Err(ConfigError::new("trials", "must be at least 1"));
        }
        if self.dims.is_empty() {
            return Err(ConfigError::new("dims", "must list at least one dimension"));
        }
        if let Some(&bad) = self.dims.iter().find(|&&n| !(1..=64).contains(&n)) {
            return Err(ConfigError::new(
                "dims",
                format!("dimension {bad} is outside 1..=64"),
            ));
        }
        if let Some(j) = self.jobs {
            if j < 1 {
                return Err(ConfigError::new("jobs", "must be at least 1"));
            }
        }
        if self.tol.is_some() && self.check != CheckKind::DiscretizeSandwich {
            return Err(ConfigError::new(
                "tol",
                format!(
                    "check `{}` certifies fixed tolerances; only discretize-sandwich \
                     takes a tolerance (its grid coarseness)",
                    self.check
                ),
            ));
        }
        self.validate_exponents()
    }

    fn validate_exponents(&self) -> Result<(), ConfigError> {
        let need = |field: &'static str, ok: bool| -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::new(field, "grid must not be empty"))
            }
        };
        match self.check {
            CheckKind::SchurHalf => need("p", !self.ps.is_empty()),
            CheckKind::ResolventTriangular => {
                need("p", !self.ps.is_empty())?;
                need("eta", !self.etas.is_empty())?;
                for &eta in &self.etas {
                    if !(0.0..=1.0).contains(&eta) {
                        return Err(ConfigError::new(
                            "eta",
                            format!("η = {eta} is outside [0, 1]"),
                        ));
                    }
                }
                Ok(())
            }
            CheckKind::QrIdentity => {
                need("r", !self.rs.is_empty())?;
                need("p", !self.ps.is_empty())?;
                for &r in &self.rs {
                    for &p in &self.ps {
                        if r.value() >= p.value() {
                            return Err(ConfigError::new(
                                "r",
                                format!("needs r < p for every grid pair, got r = {r}, p = {p}"),
                            ));
                        }
                    }
                }
                Ok(())
            }
            CheckKind::Lambda => {
                need("q", !self.qs.is_empty())?;
                need("eta", !self.etas.is_empty())?;
                for &a in &self.etas {
                    if !(a > 0.0 && a.is_finite()) {
                        return Err(ConfigError::new(
                            "eta",
                            format!("the weight exponent must be positive and finite, got {a}"),
                        ));
                    }
                }
                Ok(())
            }
            CheckKind::Referee => need("q", !self.qs.is_empty()),
            CheckKind::DiffInequality | CheckKind::DiffIntegral => {
                need("p", !self.ps.is_empty())?;
                for &p in &self.ps {
                    if p.is_infinite() || p.value() < 2.0 {
                        return Err(ConfigError::new(
                            "p",
                            format!("needs finite p ≥ 2, got p = {p}"),
                        ));
                    }
                }
                Ok(())
            }
            CheckKind::ArakiKosaki => {
                need("q", !self.qs.is_empty())?;
                need("eta", !self.etas.is_empty())?;
                for &eta in &self.etas {
                    if !(eta > 0.0 && eta <= 1.0) {
                        return Err(ConfigError::new(
                            "eta",
                            format!("η = {eta} is outside (0, 1]"),
                        ));
                    }
                }
                Ok(())
            }
            CheckKind::Derivative => {
                need("p", !self.ps.is_empty())?;
                need("t", !self.ts.is_empty())?;
                for &p in &self.ps {
                    if p.is_infinite() || p.value() <= 1.0 {
                        return Err(ConfigError::new(
                            "p",
                            format!("needs finite p > 1, got p = {p}"),
                        ));
                    }
                }
                for &s in &self.ts {
                    if !(s.is_finite() && s >= 0.0) {
                        return Err(ConfigError::new(
                            "t",
                            format!("the base point must be finite and ≥ 0, got {s}"),
                        ));
                    }
                }
                Ok(())
            }
            CheckKind::PositiveSplit => {
                need("p", !self.ps.is_empty())?;
                need("t", !self.ts.is_empty())?;
                for &p in &self.ps {
                    if p.value() < 2.0 {
                        return Err(ConfigError::new(
                            "p",
                            format!("the (p,t,d) norm needs p ≥ 2, got p = {p}"),
                        ));
                    }
                }
                for &t in &self.ts {
                    if !(t.is_finite() && t > 0.0) {
                        return Err(ConfigError::new("t", format!("needs t > 0, got {t}")));
                    }
                }
                Ok(())
            }
            CheckKind::KernelPositivity => Ok(()),
            CheckKind::Balance => {
                // Optional fixed (p, q); when absent each trial samples its own.
                if !self.ps.is_empty() || !self.qs.is_empty() {
                    let (p, q) = match (self.ps.as_slice(), self.qs.as_slice()) {
                        ([p], [q]) => (*p, *q),
                        _ => {
                            return Err(ConfigError::new(
                                "p",
                                "balance takes either no exponents or exactly one p and one q",
                            ))
                        }
                    };
                    if p.is_infinite() || q.value() < 2.0 || q.value() >= p.value() {
                        return Err(ConfigError::new(
                            "q",
                            format!("balance needs 2 ≤ q < p < ∞, got q = {q}, p = {p}"),
                        ));
                    }
                }
                Ok(())
            }
            CheckKind::EmbeddingRoundtrip => {
                need("q", !self.qs.is_empty())?;
                need("p", !self.ps.is_empty())?;
                for &p in &self.ps {
                    if p.is_infinite() || p.value() >= 2.0 {
                        return Err(ConfigError::new(
                            "p",
                            format!("the roundtrip claim covers p < 2, got p = {p}"),
                        ));
                    }
                }
                for &q in &self.qs {
                    for &p in &self.ps {
                        if q.value() >= p.value() {
                            return Err(ConfigError::new(
                                "p",
                                format!("needs q < p for every grid pair, got q = {q}, p = {p}"),
                            ));
                        }
                    }
                }
                Ok(())
            }
            CheckKind::DiscretizeSandwich => {
                let eps = self.tol.unwrap_or(0.05);
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(ConfigError::new(
                        "tol",
                        format!("the grid coarseness must lie in (0, 1), got {eps}"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// The discretization coarseness (only meaningful for
    /// `discretize-sandwich`).
    pub fn epsilon(&self) -> f64 {
        self.tol.unwrap_or(0.05)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_every_check() {
        for kind in CheckKind::ALL {
            let config = ExperimentConfig::build(kind, RawConfig::default())
                .unwrap_or_else(|e| panic!("defaults for {kind} rejected: {e}"));
            assert!(config.trials >= 1);
        }
    }

    #[test]
    fn error_names_the_offending_field() {
        let mut raw = RawConfig::default();
        raw.trials = Some(0);
        let err = ExperimentConfig::build(CheckKind::SchurHalf, raw).unwrap_err();
        assert_eq!(err.field, "trials");

        let mut raw = RawConfig::default();
        raw.dims = Some(vec![4, 65]);
        let err = ExperimentConfig::build(CheckKind::SchurHalf, raw).unwrap_err();
        assert_eq!(err.field, "dims");

        let mut raw = RawConfig::default();
        raw.p = Some(vec!["1.5".into()]);
        let err = ExperimentConfig::build(CheckKind::DiffInequality, raw).unwrap_err();
        assert_eq!(err.field, "p");

        let mut raw = RawConfig::default();
        raw.eta = Some(vec![1.5]);
        let err = ExperimentConfig::build(CheckKind::ArakiKosaki, raw).unwrap_err();
        assert_eq!(err.field, "eta");

        let mut raw = RawConfig::default();
        raw.r = Some(vec!["3".into()]);
        let err = ExperimentConfig::build(CheckKind::QrIdentity, raw).unwrap_err();
        assert_eq!(err.field, "r");

        let mut raw = RawConfig::default();
        raw.tol = Some(1e-6);
        let err = ExperimentConfig::build(CheckKind::SchurHalf, raw).unwrap_err();
        assert_eq!(err.field, "tol");
    }

    #[test]
    fn unparseable_exponents_name_their_field() {
        let mut raw = RawConfig::default();
        raw.p = Some(vec!["banana".into()]);
        let err = ExperimentConfig::build(CheckKind::SchurHalf, raw).unwrap_err();
        assert_eq!(err.field, "p");
    }

    #[test]
    fn layering_prefers_later_values() {
        let file = RawConfig {
            trials: Some(7),
            seed: Some(3),
            ..RawConfig::default()
        };
        let flags = RawConfig {
            trials: Some(11),
            ..RawConfig::default()
        };
        let merged = flags.or(file);
        assert_eq!(merged.trials, Some(11));
        assert_eq!(merged.seed, Some(3));
    }

    #[test]
    fn check_names_roundtrip() {
        for kind in CheckKind::ALL {
            assert_eq!(kind.name().parse::<CheckKind>().unwrap(), kind);
        }
        assert!("no-such-check".parse::<CheckKind>().is_err());
    }

    #[test]
    fn config_file_rejects_unknown_fields() {
        assert!(RawConfig::from_json(r#"{"trials": 5}"#).is_ok());
        assert!(RawConfig::from_json(r#"{"trails": 5}"#).is_err());
    }
}
