//! On-disk formats for matrices, densities, block structures and reports.
//!
//! All files are JSON. Matrices are stored dense row-major as `[re, im]`
//! pairs with 17 significant digits, which round-trips `f64` exactly — the
//! reproduction files written for failing trials must reload to the same
//! bits. Writing is hand-formatted (one entry per line) so diffs stay
//! readable; reading goes through serde with validation on top.

use num_complex::Complex64;
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::density::{make_density, BlockSpectrum, Density};
use crate::error::{Error, Result};
use crate::matcore::SquareMatrix;

fn malformed(reason: impl Into<String>) -> Error {
    Error::MalformedData {
        reason: reason.into(),
    }
}

fn read_error(path: &Path, err: impl std::fmt::Display) -> Error {
    malformed(format!("{}: {err}", path.display()))
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct MatrixFile {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

/// Serializes a matrix with full `f64` precision.
pub fn matrix_to_json(x: &SquareMatrix) -> String {
    let n = x.dim();
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"dim\": {n},");
    let _ = writeln!(out, "  \"entries\": [");
    for r in 0..n {
        for c in 0..n {
            let v = x.entry(r, c);
            let sep = if r == n - 1 && c == n - 1 { "" } else { "," };
            let _ = writeln!(out, "    [{:.16e}, {:.16e}]{sep}", v.re, v.im);
        }
    }
    let _ = writeln!(out, "  ]");
    let _ = write!(out, "}}");
    out
}

pub fn write_matrix(path: &Path, x: &SquareMatrix) -> Result<()> {
    fs::write(path, matrix_to_json(x)).map_err(|e| read_error(path, e))
}

fn matrix_from_file(file: MatrixFile, path: &Path) -> Result<SquareMatrix> {
    if file.dim == 0 {
        return Err(read_error(path, "dim must be positive"));
    }
    if file.entries.len() != file.dim * file.dim {
        return Err(read_error(
            path,
            format!(
                "expected {} entries for dim {}, found {}",
                file.dim * file.dim,
                file.dim,
                file.entries.len()
            ),
        ));
    }
    let n = file.dim;
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for (idx, [re, im]) in file.entries.iter().enumerate() {
        if !re.is_finite() || !im.is_finite() {
            return Err(read_error(path, format!("non-finite entry at index {idx}")));
        }
        m[(idx / n, idx % n)] = Complex64::new(*re, *im);
    }
    SquareMatrix::from_data(m)
}

pub fn read_matrix(path: &Path) -> Result<SquareMatrix> {
    let text = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    let file: MatrixFile = serde_json::from_str(&text).map_err(|e| read_error(path, e))?;
    matrix_from_file(file, path)
}

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct DensityFile {
    dim: usize,
    entries: Vec<[f64; 2]>,
    #[serde(default = "default_trace_tol")]
    trace_tol: f64,
}

fn default_trace_tol() -> f64 {
    1e-12
}

pub fn write_density(path: &Path, d: &Density) -> Result<()> {
    let mut body = matrix_to_json(d.matrix());
    // Splice the trace tolerance field before the closing brace.
    body.truncate(body.len() - 1);
    body.push_str(",\n  \"trace_tol\": 1e-12\n}");
    fs::write(path, body).map_err(|e| read_error(path, e))
}

/// Reads a density file: the stored matrix must be Hermitian PSD with trace
/// within `trace_tol` of one, and is renormalized through [`make_density`].
pub fn read_density(path: &Path) -> Result<Density> {
    let text = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    let file: DensityFile = serde_json::from_str(&text).map_err(|e| read_error(path, e))?;
    let trace_tol = file.trace_tol;
    let matrix = matrix_from_file(
        MatrixFile {
            dim: file.dim,
            entries: file.entries,
        },
        path,
    )?;
    let trace = matrix.trace();
    if (trace.re - 1.0).abs() > trace_tol || trace.im.abs() > trace_tol {
        return Err(read_error(
            path,
            format!(
                "trace {:.3e}{:+.3e}i deviates from one beyond trace_tol {trace_tol:.1e}",
                trace.re, trace.im
            ),
        ));
    }
    make_density(&matrix)
}

// ---------------------------------------------------------------------------
// Block structures
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct BlocksFile {
    values: Vec<f64>,
    ranks: Vec<usize>,
    #[serde(default)]
    dim: Option<usize>,
}

/// Writes the block data of a spectrum: values ascending with their ranks.
/// The basis is not stored — files describe coordinate block structures.
pub fn write_blocks(path: &Path, blocks: &BlockSpectrum) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"dim\": {},", blocks.dim());
    let values: Vec<String> = blocks
        .values()
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect();
    let _ = writeln!(out, "  \"values\": [{}],", values.join(", "));
    let ranks: Vec<String> = (0..blocks.count())
        .map(|k| blocks.rank(k).to_string())
        .collect();
    let _ = writeln!(out, "  \"ranks\": [{}]", ranks.join(", "));
    let _ = write!(out, "}}");
    fs::write(path, out).map_err(|e| read_error(path, e))
}

/// Reads a coordinate block structure (values ascending, positive, with
/// matching ranks; ambient dim defaults to the total rank).
pub fn read_blocks(path: &Path) -> Result<BlockSpectrum> {
    let text = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    let file: BlocksFile = serde_json::from_str(&text).map_err(|e| read_error(path, e))?;
    if file.values.len() != file.ranks.len() {
        return Err(read_error(path, "values and ranks differ in length"));
    }
    if file.ranks.iter().any(|&r| r == 0) {
        return Err(read_error(path, "block ranks must be positive"));
    }
    let support: usize = file.ranks.iter().sum();
    let dim = file.dim.unwrap_or(support);
    BlockSpectrum::coordinate(dim, &file.ranks, &file.values)
        .map_err(|e| read_error(path, format!("invalid block data ({e})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use tempfile::tempdir;

    #[test]
    fn matrix_roundtrip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.json");
        let mut rng = sample::trial_rng(90, 0);
        let x = sample::gaussian_matrix(7, &mut rng);
        write_matrix(&path, &x).unwrap();
        let back = read_matrix(&path).unwrap();
        for r in 0..7 {
            for c in 0..7 {
                let a = x.entry(r, c);
                let b = back.entry(r, c);
                assert_eq!(a.re.to_bits(), b.re.to_bits(), "re mismatch at ({r},{c})");
                assert_eq!(a.im.to_bits(), b.im.to_bits(), "im mismatch at ({r},{c})");
            }
        }
    }

    #[test]
    fn matrix_read_rejects_wrong_entry_count() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, r#"{"dim": 2, "entries": [[1.0, 0.0], [0.0, 0.0]]}"#).unwrap();
        let err = read_matrix(&path).unwrap_err();
        assert!(err.to_string().contains("expected 4 entries"));
    }

    #[test]
    fn matrix_read_rejects_non_finite() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("nan.json");
        fs::write(
            &path,
            r#"{"dim": 1, "entries": [[null, 0.0]]}"#,
        )
        .unwrap();
        assert!(read_matrix(&path).is_err());
    }

    #[test]
    fn density_roundtrip_and_trace_gate() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.json");
        let mut rng = sample::trial_rng(91, 0);
        let d = sample::density(5, &mut rng);
        write_density(&path, &d).unwrap();
        let back = read_density(&path).unwrap();
        assert!((d.matrix() - back.matrix()).frobenius_norm() < 1e-12);

        // Trace far from one is rejected even though PSD.
        let path2 = dir.path().join("d2.json");
        write_matrix(&path2, &d.matrix().scaled_real(2.0)).unwrap();
        // Re-read as density: no trace_tol field defaults to 1e-12.
        let text = fs::read_to_string(&path2).unwrap();
        fs::write(&path2, text).unwrap();
        assert!(read_density(&path2).is_err());
    }

    #[test]
    fn blocks_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("blocks.json");
        let blocks = BlockSpectrum::coordinate(6, &[2, 3], &[0.1, 0.26]).unwrap();
        write_blocks(&path, &blocks).unwrap();
        let back = read_blocks(&path).unwrap();
        assert_eq!(back.dim(), 6);
        assert_eq!(back.count(), 2);
        assert_eq!(back.rank(0), 2);
        assert_eq!(back.rank(1), 3);
        assert_eq!(back.kernel_dim(), 1);
        assert_eq!(back.values(), blocks.values());
    }

    #[test]
    fn blocks_read_rejects_decreasing_values() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad_blocks.json");
        fs::write(&path, r#"{"values": [0.5, 0.1], "ranks": [1, 1]}"#).unwrap();
        assert!(read_blocks(&path).is_err());
    }
}
