//! The non-check subcommands: seeded matrix generation (`gen`), block-map
//! operator-norm estimation (`estimate-norm`), and subspace embedding
//! (`construct`).
//!
//! All three are deterministic per seed and emit machine-readable JSON;
//! matrices travel in the same file format the rest of the toolkit reads,
//! so generated instances feed straight back into checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use nclp_core::sample::{self, trial_rng};
use nclp_core::schur::resolvent_symbol;
use nclp_core::triangular::{operator_norm_estimate, BlockMap};
use nclp_core::{
    embed_subspace, exponent_gap, heuristic_density, io, subspace_distortion, triangular_project,
    Density, Error, PNorm, Result, SquareMatrix, SubspaceBasis,
};

use crate::config::ConfigError;

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

/// What `gen` can sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    /// `(G + G*)/2` with standard complex Gaussian entries.
    Hermitian,
    /// `G G*/dim` — normalized Wishart, PSD by construction.
    Psd,
    /// The Wishart sample normalized to trace one.
    Density,
    /// A Hermitian sample compressed onto the upper-triangular part of a
    /// sampled block structure.
    UpperTriangular,
}

impl GenKind {
    pub fn name(self) -> &'static str {
        match self {
            GenKind::Hermitian => "hermitian",
            GenKind::Psd => "psd",
            GenKind::Density => "density",
            GenKind::UpperTriangular => "upper_triangular",
        }
    }
}

impl FromStr for GenKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "hermitian" => Ok(GenKind::Hermitian),
            "psd" => Ok(GenKind::Psd),
            "density" => Ok(GenKind::Density),
            "upper_triangular" | "upper-triangular" => Ok(GenKind::UpperTriangular),
            other => Err(ConfigError::new(
                "kind",
                format!(
                    "unknown kind `{other}`; expected hermitian, psd, density, or upper_triangular"
                ),
            )),
        }
    }
}

/// Draws one matrix of the requested kind, deterministic per
/// `(kind, dim, seed)`.
pub fn generate(kind: GenKind, dim: usize, seed: u64) -> Result<SquareMatrix> {
    let mut rng = trial_rng(seed, 0);
    Ok(match kind {
        GenKind::Hermitian => sample::hermitian(dim, &mut rng),
        GenKind::Psd => sample::psd(dim, &mut rng),
        GenKind::Density => sample::density(dim, &mut rng).matrix().clone(),
        GenKind::UpperTriangular => {
            let h = sample::hermitian(dim, &mut rng);
            let d = sample::blocky_density(dim, 4, 100.0, &mut rng);
            triangular_project(&h, d.blocks())?
        }
    })
}

// ---------------------------------------------------------------------------
// estimate-norm
// ---------------------------------------------------------------------------

/// Which block map `estimate-norm` probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    /// `min(d_i, d_j)/(d_i + d_j)`.
    Min,
    /// `max(d_i, d_j)/(d_i + d_j)`.
    Max,
    /// The weighted resolvent symbol at `β = 1` and the given `η`.
    Resolvent,
    /// The indicator of the upper-triangular block pairs.
    Triangular,
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Min => "min",
            MapKind::Max => "max",
            MapKind::Resolvent => "resolvent",
            MapKind::Triangular => "triangular",
        }
    }
}

impl FromStr for MapKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "min" => Ok(MapKind::Min),
            "max" => Ok(MapKind::Max),
            "resolvent" => Ok(MapKind::Resolvent),
            "triangular" => Ok(MapKind::Triangular),
            other => Err(ConfigError::new(
                "map",
                format!("unknown map `{other}`; expected min, max, resolvent, or triangular"),
            )),
        }
    }
}

/// One norm-estimation record, ready for JSON emission.
#[derive(Debug, Serialize)]
pub struct NormEstimate {
    pub map: &'static str,
    pub p: String,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub eta: f64,
    /// Best observed ratio — a certified lower bound on the operator norm.
    pub estimate: f64,
    /// Largest absolute symbol value — the exact norm at p = 2.
    pub symbol_sup: f64,
}

/// Samples a clustered density (its RNG stream is reserved so trial
/// streams stay disjoint), builds the requested block map, and runs the
/// random-ascent lower-bound estimator.
pub fn estimate_norm(
    map_kind: MapKind,
    p: PNorm,
    dim: usize,
    trials: usize,
    seed: u64,
    eta: f64,
) -> Result<NormEstimate> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::bad_exponents(format!(
            "the resolvent interpolation parameter must lie in [0,1], got η = {eta}"
        )));
    }
    let mut rng = trial_rng(seed, u64::MAX);
    let d = sample::blocky_density(dim, 4, 1e3, &mut rng);
    let blocks = d.blocks().clone();
    let map = match map_kind {
        MapKind::Min => BlockMap::new(blocks, |a, b| a.min(b) / (a + b))?,
        MapKind::Max => BlockMap::new(blocks, |a, b| a.max(b) / (a + b))?,
        MapKind::Resolvent => {
            let symbol = resolvent_symbol(1.0, eta);
            BlockMap::new(blocks, move |a, b| symbol.eval(a, b))?
        }
        // Block values ascend strictly, so the index order i ≤ j is
        // exactly the value order d_i ≤ d_j.
        MapKind::Triangular => BlockMap::new(blocks, |a, b| if a <= b { 1.0 } else { 0.0 })?,
    };
    let estimate = operator_norm_estimate(&map, p, dim, trials, seed)?;
    Ok(NormEstimate {
        map: map_kind.name(),
        p: p.to_string(),
        dim,
        trials,
        seed,
        eta,
        estimate,
        symbol_sup: map.max_abs_symbol(),
    })
}

// ---------------------------------------------------------------------------
// construct
// ---------------------------------------------------------------------------

/// The `--basis` manifest: matrix files listed relative to the manifest's
/// own directory.
#[derive(Debug, Deserialize)]
struct BasisManifest {
    vectors: Vec<PathBuf>,
}

/// One embedding-construction record, ready for JSON emission.
#[derive(Debug, Serialize)]
pub struct ConstructRecord {
    pub q: String,
    pub p: String,
    pub basis_size: usize,
    pub dim: usize,
    pub alpha: f64,
    pub support_rank: usize,
    pub condition_d: f64,
    pub reconstruction_residual: f64,
    pub distortion_lower: f64,
    pub distortion_upper: f64,
    pub trials: usize,
    pub seed: u64,
}

fn read_manifest(path: &Path) -> Result<Vec<SquareMatrix>> {
    let text = fs::read_to_string(path).map_err(|e| Error::MalformedData {
        reason: format!("cannot read basis manifest {}: {e}", path.display()),
    })?;
    let manifest: BasisManifest =
        serde_json::from_str(&text).map_err(|e| Error::MalformedData {
            reason: format!("basis manifest {} did not parse: {e}", path.display()),
        })?;
    if manifest.vectors.is_empty() {
        return Err(Error::MalformedData {
            reason: "basis manifest lists no vectors".into(),
        });
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    manifest
        .vectors
        .iter()
        .map(|rel| io::read_matrix(&base.join(rel)))
        .collect()
}

/// Embeds the subspace spanned by the manifest's vectors: verifies the
/// round trip on each basis vector, samples the distortion, and (when an
/// output directory is given) writes the images plus the density used.
pub fn construct(
    manifest: &Path,
    density_path: Option<&Path>,
    q: PNorm,
    p: PNorm,
    trials: usize,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<ConstructRecord> {
    exponent_gap(q, p)?; // fail fast on an inadmissible exponent pair
    let basis = SubspaceBasis::new(read_manifest(manifest)?)?;
    let density: Density = match density_path {
        Some(path) => io::read_density(path)?,
        None => heuristic_density(&basis)?,
    };
    let embedded = embed_subspace(&basis, &density, q, p)?;
    let distortion = subspace_distortion(&basis, &density, q, p, trials, seed)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::MalformedData {
            reason: format!("cannot create output directory {}: {e}", dir.display()),
        })?;
        for (k, image) in embedded.images().iter().enumerate() {
            io::write_matrix(&dir.join(format!("u_{k}.json")), image)?;
        }
        io::write_density(&dir.join("density.json"), &density)?;
    }
    Ok(ConstructRecord {
        q: q.to_string(),
        p: p.to_string(),
        basis_size: basis.len(),
        dim: basis.dim_ambient(),
        alpha: embedded.alpha(),
        support_rank: embedded.support_rank(),
        condition_d: density.condition(),
        reconstruction_residual: embedded.reconstruction_residual(),
        distortion_lower: distortion.lower,
        distortion_upper: distortion.upper,
        trials,
        seed,
    })
}
