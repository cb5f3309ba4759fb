//! Weighted Schatten norms: one-sided change-of-density norms, their
//! two-sided intersection, triangular weighted norms, the three-term
//! `(p,t,d)` norm, and the symmetric modulus.
//!
//! Throughout, a pair of exponents `1 ≤ q < p ≤ ∞` determines the weight
//! gap `α = 1/q − 1/p`: the one-sided norms are `‖d^α x‖_q` (left) and
//! `‖x d^α‖_q` (right), and the intersection takes the max of the two. With
//! singular `d` these are seminorms vanishing on the complementary corner
//! `(1−e)·(1−e)` — deliberate, since the corner decomposition is what the
//! embedding machinery runs on.

use crate::density::{BlockSpectrum, Density};
use crate::error::{Error, Result};
use crate::matcore::{func_calculus, rationalize, schatten_norm, PNorm, SquareMatrix};

/// Which side of `x` a density weight multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Which triangular part of a block decomposition is kept: `Upper` is
/// `i ≤ j` (diagonal included), `Lower` the strict complement `i > j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrianglePart {
    Upper,
    Lower,
}

impl TrianglePart {
    /// Indicator of the part on a block-index pair.
    pub fn keeps(self, i: usize, j: usize) -> bool {
        match self {
            TrianglePart::Upper => i <= j,
            TrianglePart::Lower => i > j,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            TrianglePart::Upper => TrianglePart::Lower,
            TrianglePart::Lower => TrianglePart::Upper,
        }
    }
}

/// The exact weight gap `1/q − 1/p` for `1 ≤ q < p ≤ ∞`.
///
/// When both exponents are recognized rationals the gap is computed in
/// integer arithmetic and rounded once; exponent drift would otherwise
/// compound through `d^α` powers.
pub fn exponent_gap(q: PNorm, p: PNorm) -> Result<f64> {
    if q.value() >= p.value() {
        return Err(Error::bad_exponents(format!(
            "weighted norms need q < p strictly, got q = {q}, p = {p}"
        )));
    }
    match (q, p) {
        (PNorm::Finite(qv), PNorm::Finite(pv)) => {
            if let (Some((qn, qd)), Some((pn, pd))) = (rationalize(qv), rationalize(pv)) {
                // 1/q − 1/p = (qd·pn − pd·qn)/(qn·pn), one rounding.
                let num = (qd as i128) * (pn as i128) - (pd as i128) * (qn as i128);
                let den = (qn as i128) * (pn as i128);
                Ok(num as f64 / den as f64)
            } else {
                Ok(q.reciprocal() - p.reciprocal())
            }
        }
        _ => Ok(q.reciprocal()),
    }
}

/// An exponent pair `1 ≤ q < p ≤ ∞` with its derived gap `α = 1/q − 1/p`
/// (equivalently `1/s` for the interpolation parameter `s`).
#[derive(Clone, Copy, Debug)]
pub struct ExponentSpec {
    p: PNorm,
    q: PNorm,
    alpha: f64,
}

impl ExponentSpec {
    pub fn new(p: PNorm, q: PNorm) -> Result<Self> {
        let alpha = exponent_gap(q, p)?;
        Ok(Self { p, q, alpha })
    }

    pub fn p(&self) -> PNorm {
        self.p
    }

    pub fn q(&self) -> PNorm {
        self.q
    }

    /// The weight exponent `α = 1/q − 1/p ∈ (0, 1]`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The parameter `s` with `1/s = 1/q − 1/p`.
    pub fn s(&self) -> f64 {
        1.0 / self.alpha
    }
}

fn check_dims(x: &SquareMatrix, d: &Density) -> Result<()> {
    if x.dim() != d.dim() {
        return Err(Error::DimMismatch {
            expected: d.dim(),
            found: x.dim(),
        });
    }
    Ok(())
}

/// One-sided weighted norm `‖d^α x‖_q` (left) or `‖x d^α‖_q` (right) with
/// `α = 1/q − 1/p`. A seminorm when `d` is singular.
pub fn weighted_norm(x: &SquareMatrix, d: &Density, spec: &ExponentSpec, side: Side) -> Result<f64> {
    check_dims(x, d)?;
    let w = d.power(spec.alpha());
    let weighted = match side {
        Side::Left => &w * x,
        Side::Right => x * &w,
    };
    Ok(schatten_norm(&weighted, spec.q()))
}

/// The intersection norm `max{‖d^α x‖_q, ‖x d^α‖_q}` — the two-sided
/// change-of-density space. Vanishes on `(1−e)x(1−e)` for singular `d`.
pub fn delta_norm(x: &SquareMatrix, d: &Density, spec: &ExponentSpec) -> Result<f64> {
    let left = weighted_norm(x, d, spec, Side::Left)?;
    let right = weighted_norm(x, d, spec, Side::Right)?;
    Ok(left.max(right))
}

/// The three-term norm `max{t^{1/p}‖x‖_p, t‖d^{1/p'}x‖_1, t‖x d^{1/p'}‖_1}`
/// for `p ≥ 2` and `t > 0`.
pub fn ptd_norm(x: &SquareMatrix, d: &Density, p: PNorm, t: f64) -> Result<f64> {
    check_dims(x, d)?;
    if p.value() < 2.0 {
        return Err(Error::bad_exponents(format!(
            "the (p,t,d) norm needs p ≥ 2, got p = {p}"
        )));
    }
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::bad_exponents(format!(
            "the (p,t,d) norm needs t > 0, got t = {t}"
        )));
    }
    let w = d.power(p.conjugate().reciprocal());
    let body = t.powf(p.reciprocal()) * schatten_norm(x, p);
    let left = t * schatten_norm(&(&w * x), PNorm::Finite(1.0));
    let right = t * schatten_norm(&(x * &w), PNorm::Finite(1.0));
    Ok(body.max(left).max(right))
}

/// Pisier's symmetric modulus `|x|_s = ((x*x + xx*)/2)^{1/2}`, the PSD
/// average of the two absolute values. For normal `x` it is `|x|` itself.
pub fn symmetric_modulus(x: &SquareMatrix) -> SquareMatrix {
    let sq = (&(&x.adjoint() * x) + &(x * &x.adjoint())).scaled_real(0.5);
    func_calculus(&sq, f64::sqrt)
        .expect("(x*x + xx*)/2 is Hermitian PSD up to roundoff absorbed by the kernel threshold")
}

/// Triangular weighted norm: compress to the chosen triangular part and
/// weight blockwise by `d_i^α` (left) or `d_j^α` (right), then take `‖·‖_q`:
/// e.g. upper/left is `‖Σ_{i≤j} d_i^α e_i x e_j‖_q`.
pub fn triangular_weighted_norm(
    x: &SquareMatrix,
    blocks: &BlockSpectrum,
    q: PNorm,
    alpha: f64,
    part: TrianglePart,
    side: Side,
) -> Result<f64> {
    let values = blocks.values().to_vec();
    let rotated = blocks.scale_blocks_rotated(x, |i, j| {
        if part.keeps(i, j) {
            match side {
                Side::Left => values[i].powf(alpha),
                Side::Right => values[j].powf(alpha),
            }
        } else {
            0.0
        }
    })?;
    // Schatten norms are unitarily invariant: evaluate in the eigenbasis.
    Ok(schatten_norm(
        &SquareMatrix::from_data_unchecked(rotated),
        q,
    ))
}
