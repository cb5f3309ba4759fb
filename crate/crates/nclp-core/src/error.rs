//! Error types shared across the toolkit.
//!
//! Every fallible operation returns [`Error`]; the variants mirror the
//! mathematical preconditions (Hermiticity, positivity, exponent ranges,
//! triangularity, corner annihilation) rather than low-level causes, so a
//! caller can match on what went wrong in the model, not in the arithmetic.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The input was expected to be Hermitian but `‖a − a*‖_∞` exceeds the
    /// tolerance `1e-10 · max(1, ‖a‖_∞)`.
    #[error("matrix not Hermitian: symmetry defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    /// A scalar function was evaluated at a retained eigenvalue where it is
    /// not finite (the kernel of a singular matrix is exempt — see the
    /// pseudo-functional calculus in [`crate::matcore::func_calculus`]).
    #[error("scalar function not finite at retained eigenvalue {eigenvalue:.6e}")]
    DomainError { eigenvalue: f64 },

    /// Two operands (or an operand and a block structure) disagree on the
    /// ambient dimension.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    /// A matrix that must be normalized to trace one has (numerically) zero
    /// trace.
    #[error("cannot normalize to trace one: trace {trace:.3e} is numerically zero")]
    ZeroTrace { trace: f64 },

    /// A matrix that must be positive semidefinite has a retained negative
    /// eigenvalue (beyond the kernel-clipping slack).
    #[error("matrix not positive semidefinite: retained eigenvalue {eigenvalue:.6e} < 0")]
    NotPSD { eigenvalue: f64 },

    /// Discretization step must satisfy ε > 0.
    #[error("invalid discretization step ε = {epsilon}; must be positive and finite")]
    InvalidEpsilon { epsilon: f64 },

    /// Norm/space exponents violate their admissible range (e.g. q ≥ p where
    /// 1 ≤ q < p ≤ ∞ is required).
    #[error("bad exponents: {reason}")]
    BadExponents { reason: String },

    /// A Schur multiplier symbol evaluated to a non-finite value at a pair of
    /// block values.
    #[error("multiplier symbol not finite at block values ({left:.6e}, {right:.6e})")]
    SymbolUndefined { left: f64, right: f64 },

    /// An input that must be triangular relative to the block order has too
    /// much mass on the opposite part.
    #[error(
        "input not {part}-triangular: off-part Frobenius mass {mass:.3e} exceeds tolerance {tol:.3e}"
    )]
    NotTriangular {
        part: &'static str,
        mass: f64,
        tol: f64,
    },

    /// The corner (1−e)x(1−e) must vanish for the change-of-density embedding
    /// to be defined, and it does not.
    #[error(
        "corner (1-e)x(1-e) not annihilated: Frobenius mass {mass:.3e} exceeds tolerance {tol:.3e}"
    )]
    CornerNotAnnihilated { mass: f64, tol: f64 },

    /// A subspace basis whose Gram matrix is numerically singular.
    #[error(
        "degenerate subspace basis: Gram eigenvalue ratio {min_eig:.3e}/{max_eig:.3e} below 1e-10"
    )]
    DegenerateBasis { min_eig: f64, max_eig: f64 },

    /// The change-of-density factorization failed to reproduce an input it
    /// is required to reproduce (an implementation or conditioning problem,
    /// surfaced loudly rather than silently degrading).
    #[error(
        "embedding failed to reconstruct its input: relative residual {residual:.3e} exceeds {tol:.1e}"
    )]
    ReconstructionFailed { residual: f64, tol: f64 },

    /// A matrix file (or other serialized input) failed validation.
    #[error("malformed matrix data: {reason}")]
    MalformedData { reason: String },
}

impl Error {
    /// Helper for the many `BadExponents` sites: keeps the construction terse.
    pub fn bad_exponents(reason: impl Into<String>) -> Self {
        Error::BadExponents {
            reason: reason.into(),
        }
    }
}
