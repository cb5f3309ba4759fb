//! Densities of (not necessarily faithful) states and their spectral blocks.
//!
//! A [`Density`] is a Hermitian PSD trace-one matrix `d`, the density of the
//! state `φ(x) = tr(dx)`. Its distinct eigenvalues, listed ascending with
//! their spectral projections, form a [`BlockSpectrum`]
//! `d = Σ_k d_k e_k` — the structure every Schur multiplier, triangular
//! projection and weighted norm in this crate is defined against. The state
//! need not be faithful: eigenvalues at numerical zero form the kernel, and
//! all block operations compress to the support.
//!
//! [`discretize`] produces the geometric-grid approximation `d_ε` with
//! `(1+ε)⁻¹ d_ε ⪯ d ⪯ (1+ε) d_ε`, commuting with `d` — the standard
//! reduction to finitely many well-separated eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::matcore::{hermitian_eigen, SquareMatrix, KERNEL_THRESHOLD};

/// Default relative gap under which adjacent eigenvalues merge into one
/// spectral block; separates genuine blocks from eigensolver jitter.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-9;

/// Retained eigenvalues below `-1e-10·λ_max` disqualify an input from being
/// treated as PSD (between this and the kernel threshold they are clipped).
const PSD_SLACK: f64 = 1e-10;

// ---------------------------------------------------------------------------
// BlockSpectrum
// ---------------------------------------------------------------------------

/// The spectral block structure `d = Σ_k d_k e_k`: distinct positive values
/// ascending, with pairwise-orthogonal projections summing to the support.
///
/// Internally the blocks are stored as column ranges of one unitary
/// (kernel columns first, then support columns grouped by block), so every
/// blockwise operation is "rotate to the eigenbasis, act entrywise, rotate
/// back" — exact per block, with no sums of rank-one pieces.
#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    dim: usize,
    basis: DMatrix<Complex64>,
    kernel_dim: usize,
    values: Vec<f64>,
    ranges: Vec<Range<usize>>,
}

impl BlockSpectrum {
    fn new(
        dim: usize,
        basis: DMatrix<Complex64>,
        kernel_dim: usize,
        values: Vec<f64>,
        ranges: Vec<Range<usize>>,
    ) -> Self {
        debug_assert_eq!(values.len(), ranges.len());
        debug_assert!(values.windows(2).all(|w| w[0] < w[1]));
        Self {
            dim,
            basis,
            kernel_dim,
            values,
            ranges,
        }
    }

    /// Block structure over the *standard* coordinate basis: consecutive
    /// index groups of the given sizes carry the given (ascending, positive)
    /// values. Useful for constructing examples and sampled structures
    /// without an eigendecomposition.
    pub fn coordinate(dim: usize, sizes: &[usize], values: &[f64]) -> Result<Self> {
        if sizes.len() != values.len() || sizes.is_empty() {
            return Err(Error::MalformedData {
                reason: "block sizes and values must be nonempty and equal length".into(),
            });
        }
        if sizes.iter().sum::<usize>() > dim {
            return Err(Error::MalformedData {
                reason: "block sizes exceed ambient dimension".into(),
            });
        }
        if !values.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::MalformedData {
                reason: "block values must be positive finite".into(),
            });
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::MalformedData {
                reason: "block values must be strictly increasing".into(),
            });
        }
        let support: usize = sizes.iter().sum();
        let kernel_dim = dim - support;
        let mut ranges = Vec::with_capacity(sizes.len());
        let mut at = kernel_dim;
        for &s in sizes {
            ranges.push(at..at + s);
            at += s;
        }
        // Kernel columns first: the identity basis is permuted accordingly.
        let mut basis = DMatrix::<Complex64>::zeros(dim, dim);
        for k in 0..kernel_dim {
            basis[(support + k, k)] = Complex64::new(1.0, 0.0);
        }
        for k in 0..support {
            basis[(k, kernel_dim + k)] = Complex64::new(1.0, 0.0);
        }
        Ok(Self::new(dim, basis, kernel_dim, values.to_vec(), ranges))
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of blocks `m`.
    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// Distinct block values `d_1 < … < d_m`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rank of the `k`-th block projection.
    pub fn rank(&self, k: usize) -> usize {
        self.ranges[k].len()
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    pub fn support_rank(&self) -> usize {
        self.dim - self.kernel_dim
    }

    /// The orthogonal projection `e_k`.
    pub fn projection(&self, k: usize) -> SquareMatrix {
        self.assemble_columns(self.ranges[k].clone())
    }

    /// The support projection `e = Σ_k e_k`.
    pub fn support_projection(&self) -> SquareMatrix {
        self.assemble_columns(self.kernel_dim..self.dim)
    }

    fn assemble_columns(&self, cols: Range<usize>) -> SquareMatrix {
        let sub = self.basis.columns(cols.start, cols.len());
        SquareMatrix::from_data_unchecked(&sub * sub.adjoint())
    }

    /// Block index of eigenbasis column `c` (`None` on the kernel).
    fn block_of_col(&self, c: usize) -> Option<usize> {
        if c < self.kernel_dim {
            return None;
        }
        self.ranges.iter().position(|r| r.contains(&c))
    }

    fn check_dim(&self, x: &SquareMatrix) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// The workhorse: `Σ_{i,j} f(i,j)·e_i x e_j` over support blocks, with
    /// everything touching the kernel annihilated. Computed in the
    /// eigenbasis, so each block is scaled exactly once.
    pub fn scale_blocks(&self, x: &SquareMatrix, f: impl Fn(usize, usize) -> f64) -> Result<SquareMatrix> {
        Ok(self.from_eigenbasis(self.scale_blocks_rotated(x, f)?))
    }

    /// As [`scale_blocks`](Self::scale_blocks) but returns the result still
    /// expressed in the eigenbasis (Schatten norms are unitarily invariant,
    /// so norm evaluations can skip the rotation back).
    pub fn scale_blocks_rotated(
        &self,
        x: &SquareMatrix,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<DMatrix<Complex64>> {
        self.check_dim(x)?;
        let mut y = self.to_eigenbasis(x);
        let n = self.dim;
        // Precompute column → block map once.
        let col_block: Vec<Option<usize>> = (0..n).map(|c| self.block_of_col(c)).collect();
        for r in 0..n {
            for c in 0..n {
                let scale = match (col_block[r], col_block[c]) {
                    (Some(i), Some(j)) => f(i, j),
                    _ => 0.0,
                };
                y[(r, c)] *= scale;
            }
        }
        Ok(y)
    }

    /// `U* x U`.
    pub fn to_eigenbasis(&self, x: &SquareMatrix) -> DMatrix<Complex64> {
        self.basis.adjoint() * x.data() * &self.basis
    }

    /// `U y U*`.
    pub fn from_eigenbasis(&self, y: DMatrix<Complex64>) -> SquareMatrix {
        SquareMatrix::from_data_unchecked(&self.basis * y * self.basis.adjoint())
    }

    /// Frobenius mass of the part of `x` annihilated by support compression,
    /// `‖x − exe‖_2` — reported alongside Schur applications.
    pub fn off_support_mass(&self, x: &SquareMatrix) -> Result<f64> {
        self.check_dim(x)?;
        if self.kernel_dim == 0 {
            return Ok(0.0);
        }
        let y = self.to_eigenbasis(x);
        let mut mass = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r < self.kernel_dim || c < self.kernel_dim {
                    mass += y[(r, c)].norm_sqr();
                }
            }
        }
        Ok(mass.sqrt())
    }

    /// `Σ_k d_k^α e_k` (pseudo-power: the kernel stays zero).
    pub fn power(&self, alpha: f64) -> SquareMatrix {
        let mut y = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for c in self.kernel_dim..self.dim {
            let k = self.block_of_col(c).expect("support column has a block");
            y[(c, c)] = Complex64::new(self.values[k].powf(alpha), 0.0);
        }
        self.from_eigenbasis(y)
    }

    /// Spread `d_max^α / d_min^α` of the weight `d^α` over the support;
    /// resolvent callers treat values above `1e12` as ill-conditioned.
    pub fn weight_condition(&self, alpha: f64) -> f64 {
        let lo = self.values.first().copied().unwrap_or(1.0);
        let hi = self.values.last().copied().unwrap_or(1.0);
        (hi / lo).powf(alpha.abs())
    }
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

/// A trace-one PSD matrix with its support and spectral blocks.
#[derive(Clone, Debug)]
pub struct Density {
    matrix: SquareMatrix,
    eigenvalues: Vec<f64>, // ascending, kernel zeros first, clipped
    blocks: BlockSpectrum, // at DEFAULT_CLUSTER_TOL
}

impl Density {
    /// The density matrix `d` itself.
    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Clipped eigenvalues, ascending (kernel zeros first).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Block structure at the default cluster tolerance.
    pub fn blocks(&self) -> &BlockSpectrum {
        &self.blocks
    }

    pub fn support_rank(&self) -> usize {
        self.blocks.support_rank()
    }

    pub fn kernel_dim(&self) -> usize {
        self.blocks.kernel_dim()
    }

    pub fn is_faithful(&self) -> bool {
        self.kernel_dim() == 0
    }

    /// The support projection `e`.
    pub fn support_projection(&self) -> SquareMatrix {
        self.blocks.support_projection()
    }

    /// `d^α` as a pseudo-power on the support (see [`power_weight`]).
    pub fn power(&self, alpha: f64) -> SquareMatrix {
        self.blocks.power(alpha)
    }

    /// Eigenvalue spread `λ_max/λ_min` over the support.
    pub fn condition(&self) -> f64 {
        let vals = self.blocks.values();
        match (vals.first(), vals.last()) {
            (Some(lo), Some(hi)) => hi / lo,
            _ => 1.0,
        }
    }

    /// Rebuilds a density from an eigensystem that is already clipped,
    /// normalized and ascending (kernel zeros first).
    fn from_eigensystem(basis: DMatrix<Complex64>, eigenvalues: Vec<f64>) -> Self {
        let blocks = cluster_blocks(&basis, &eigenvalues, DEFAULT_CLUSTER_TOL);
        let n = eigenvalues.len();
        let mut scaled = basis.clone();
        for (c, &v) in eigenvalues.iter().enumerate() {
            for r in 0..n {
                scaled[(r, c)] *= v;
            }
        }
        let matrix = SquareMatrix::from_data_unchecked(&scaled * basis.adjoint());
        Self {
            matrix,
            eigenvalues,
            blocks,
        }
    }
}

/// Normalizes a Hermitian PSD matrix to a [`Density`].
///
/// Eigenvalues at numerical zero (`λ ≤ 1e-12·λ_max`) are clipped to exact
/// zeros and form the kernel; a retained eigenvalue below `−1e-10·λ_max` is
/// a genuine negativity and rejected. The result is `a/tr(a)`; the
/// construction is idempotent on already-normalized input.
pub fn make_density(a: &SquareMatrix) -> Result<Density> {
    let eig = hermitian_eigen(a)?;
    let lambda_max = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()));
    if lambda_max == 0.0 {
        return Err(Error::ZeroTrace { trace: 0.0 });
    }
    let kernel_cut = KERNEL_THRESHOLD * lambda_max;
    let psd_cut = -PSD_SLACK * lambda_max;
    let mut clipped = Vec::with_capacity(eig.eigenvalues.len());
    for &l in &eig.eigenvalues {
        if l < psd_cut {
            return Err(Error::NotPSD { eigenvalue: l });
        }
        clipped.push(if l <= kernel_cut { 0.0 } else { l });
    }
    let trace: f64 = clipped.iter().sum();
    if trace <= 0.0 {
        return Err(Error::ZeroTrace { trace });
    }
    for l in clipped.iter_mut() {
        *l /= trace;
    }
    // Ascending with kernel zeros first is automatic: eigenvalues came
    // ascending and clipping preserves order.
    Ok(Density::from_eigensystem(eig.basis, clipped))
}

/// Clusters the support eigenvalues into blocks: adjacent eigenvalues merge
/// while their gap is at most `cluster_tol` relative to the larger one, and
/// each block's value is the mean of its members (so `Σ d_k·rank(e_k)`
/// preserves the trace).
fn cluster_blocks(
    basis: &DMatrix<Complex64>,
    eigenvalues: &[f64],
    cluster_tol: f64,
) -> BlockSpectrum {
    let n = eigenvalues.len();
    let kernel_dim = eigenvalues.iter().take_while(|&&l| l == 0.0).count();
    let mut values = Vec::new();
    let mut ranges = Vec::new();
    let mut start = kernel_dim;
    while start < n {
        let mut end = start + 1;
        while end < n {
            let gap = eigenvalues[end] - eigenvalues[end - 1];
            if gap <= cluster_tol * eigenvalues[end] {
                end += 1;
            } else {
                break;
            }
        }
        let mean =
            eigenvalues[start..end].iter().sum::<f64>() / (end - start) as f64;
        values.push(mean);
        ranges.push(start..end);
        start = end;
    }
    BlockSpectrum::new(n, basis.clone(), kernel_dim, values, ranges)
}

/// Re-derives the block structure of `d` at a caller-chosen cluster
/// tolerance (`0 ≤ cluster_tol < 1`; `0` merges only exact duplicates).
pub fn spectral_blocks(d: &Density, cluster_tol: f64) -> Result<BlockSpectrum> {
    if !(0.0..1.0).contains(&cluster_tol) {
        return Err(Error::MalformedData {
            reason: format!("cluster tolerance must lie in [0, 1), got {cluster_tol}"),
        });
    }
    Ok(cluster_blocks(
        &d.blocks.basis,
        &d.eigenvalues,
        cluster_tol,
    ))
}

/// The weight `d^α = Σ_k d_k^α e_k`, a pseudo-power on the support: for any
/// `α` (including negatives) the kernel contributes nothing, and
/// `power_weight(d, 0)` is the support projection itself.
pub fn power_weight(d: &Density, alpha: f64) -> SquareMatrix {
    d.power(alpha)
}

/// [`discretize`] plus the verified sandwich constant: the smallest `c` with
/// `c⁻¹ d_ε ⪯ d ⪯ c·d_ε` over the support spectrum (always ≤ 1+ε).
pub fn discretize_with_constant(d: &Density, epsilon: f64) -> Result<(Density, f64)> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidEpsilon { epsilon });
    }
    let lambda_max = *d.eigenvalues.last().expect("density has an eigenvalue");
    let log_ratio = (1.0 + epsilon).ln();
    // Snap each support eigenvalue to the nearest point of the geometric
    // grid λ_max·(1+ε)^{-j} in log scale; round-off is at most a half step,
    // so the pre-normalization sandwich holds with constant √(1+ε).
    let mut snapped = Vec::with_capacity(d.eigenvalues.len());
    for &l in &d.eigenvalues {
        if l == 0.0 {
            snapped.push(0.0);
        } else {
            let j = ((lambda_max / l).ln() / log_ratio).round().max(0.0);
            snapped.push(lambda_max * (1.0 + epsilon).powf(-j));
        }
    }
    // Renormalize to trace one; the factor is itself within √(1+ε) of 1, so
    // the final sandwich constant stays ≤ 1+ε.
    let trace: f64 = snapped.iter().sum();
    for v in snapped.iter_mut() {
        *v /= trace;
    }
    let mut constant = 1.0f64;
    for (&v, &l) in snapped.iter().zip(d.eigenvalues.iter()) {
        if l > 0.0 {
            constant = constant.max(v / l).max(l / v);
        }
    }
    let d_eps = Density::from_eigensystem(d.blocks.basis.clone(), snapped);
    Ok((d_eps, constant))
}

/// Geometric-grid discretization `d_ε` of Step-2 type: commutes with `d`
/// (same eigenbasis), has finitely many values in geometric progression of
/// ratio `1+ε`, satisfies `(1+ε)⁻¹ d_ε ⪯ d ⪯ (1+ε) d_ε`, and has trace one.
pub fn discretize(d: &Density, epsilon: f64) -> Result<Density> {
    discretize_with_constant(d, epsilon).map(|(d_eps, _)| d_eps)
}
