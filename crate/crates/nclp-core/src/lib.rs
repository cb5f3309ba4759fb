//! Finite-dimensional toolkit for noncommutative L_p analysis.
//!
//! Everything lives on matrix algebras: a trace-one PSD [`Density`] carries
//! a state, its spectral blocks drive Schur multipliers and triangular
//! projections, and weighted Schatten norms measure the resulting spaces.
//! On top of those sit the change-of-density maps, the row/column embedding
//! and the family of trace inequalities, each paired with numeric checks
//! that certify the advertised constants on sampled inputs.
//!
//! The crate is deliberately dense-matrix and `f64`: dimensions stay small
//! (≤ 64 across the test surface) and every operation routes through full
//! eigendecompositions, trading speed for the exactness of blockwise
//! arithmetic in the eigenbasis.

pub mod density;
pub mod embedding;
pub mod error;
pub mod inequalities;
pub mod io;
pub mod matcore;
pub mod quad;
pub mod report;
pub mod sample;
pub mod schur;
pub mod spaces;
pub mod triangular;

pub use density::{
    discretize, discretize_with_constant, make_density, power_weight, spectral_blocks,
    BlockSpectrum, Density, DEFAULT_CLUSTER_TOL,
};
pub use embedding::{
    balance_parameter, embed_subspace, embed_u, heuristic_density, reconstruct,
    subspace_distortion, DistortionEstimate, EmbeddingResult, SubspaceBasis,
};
pub use error::{Error, Result};
pub use inequalities::{
    check_araki_kosaki, check_derivative, check_diff_inequality, check_diff_integral,
    check_operator_convexity, check_positive_split, positive_split, DERIVATIVE_STEP,
};
pub use matcore::{
    func_calculus, hermitian_eigen, schatten_norm, singular_values, trace_pair, HermitianEigen,
    PNorm, SquareMatrix, HERMITICITY_TOL, KERNEL_THRESHOLD,
};
pub use report::{digest_matrices, digest_params, CheckReport, RunSummary, Verdict};
pub use schur::{
    kernel_positivity_check, lambda_map, min_multiplier, qr_project, referee_components,
    referee_project, resolvent_weighted, schur_apply, MultiplierSymbol,
};
pub use spaces::{
    delta_norm, exponent_gap, ptd_norm, symmetric_modulus, triangular_weighted_norm, weighted_norm,
    ExponentSpec, Side, TrianglePart,
};
pub use triangular::{
    operator_norm_estimate, triangular_complement, triangular_project, BlockMap,
};
