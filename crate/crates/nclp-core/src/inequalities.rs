//! Trace-inequality checkers with certified constants.
//!
//! Each checker takes concrete matrices, evaluates both sides of one
//! inequality, and returns a [`CheckReport`] carrying the numbers and the
//! verdict. Tolerances are fixed here, not configurable: they are part of
//! the claim being certified. Alongside the headline inequalities sit two
//! consistency identities (an integral representation of the `p`-norm
//! difference and a derivative formula) that cross-check the machinery
//! itself, plus the positive-part splitting used to reduce general
//! matrices to PSD ones.

use num_complex::Complex64;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::matcore::{func_calculus, hermitian_eigen, schatten_norm, trace_pair, PNorm, SquareMatrix};
use crate::quad::integrate;
use crate::report::{digest_matrices, CheckReport};
use crate::spaces::ptd_norm;

/// Relative slack granted to the difference inequality and its
/// operator-convexity refinement.
const DIFF_TOL: f64 = 1e-9;

/// Relative slack granted to the Araki–Kosaki comparison.
const ARAKI_KOSAKI_TOL: f64 = 1e-10;

/// Relative residual allowed in the integral representation identity.
const INTEGRAL_TOL: f64 = 1e-7;

/// Absolute-over-scale residual allowed when comparing the central
/// difference quotient against the trace formula for the derivative.
const DERIVATIVE_TOL: f64 = 1e-5;

/// Step used by the central difference quotient in [`check_derivative`].
pub const DERIVATIVE_STEP: f64 = 1e-4;

/// Resummation residual allowed when the four positive parts are put back
/// together, relative to the Frobenius norm of the input.
const SPLIT_RESUM_TOL: f64 = 1e-12;

/// Relative excess allowed on the `L_p(t, d)`-norm of each positive part
/// over the norm of the whole matrix.
const SPLIT_CONTRACTION_TOL: f64 = 1e-10;

/// Eigenvalues `f(m)` for Hermitian `m` whose spectrum is nonnegative up
/// to the usual relative slack; tiny negatives are clipped to zero before
/// `t ↦ t^r` is applied, genuine negatives are a [`Error::NotPSD`].
fn psd_power(m: &SquareMatrix, r: f64) -> Result<SquareMatrix> {
    let eig = hermitian_eigen(m)?;
    let max = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if min < -1e-10 * max {
        return Err(Error::NotPSD { eigenvalue: min });
    }
    let values: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&v| if v <= 0.0 { 0.0 } else { v.powf(r) })
        .collect();
    Ok(eig.assemble(&values))
}

/// `tr(m^p)` for PSD `m` — the `p`-th power of the Schatten norm, accumulated
/// from the clipped spectrum so the two sides of a trace inequality see the
/// same eigenvalues.
fn trace_power(m: &SquareMatrix, p: f64) -> Result<f64> {
    let eig = hermitian_eigen(m)?;
    let max = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if min < -1e-10 * max {
        return Err(Error::NotPSD { eigenvalue: min });
    }
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&v| if v <= 0.0 { 0.0 } else { v.powf(p) })
        .sum())
}

fn require_finite_at_least(p: PNorm, lo: f64, what: &str) -> Result<f64> {
    match p {
        PNorm::Finite(v) if v >= lo => Ok(v),
        _ => Err(Error::bad_exponents(format!(
            "{what} needs a finite exponent ≥ {lo}, got p = {p}"
        ))),
    }
}

/// Certifies `tr((a+x)^p) − tr(a^p) ≤ p·2^{p−1}·max{‖a^{p−1}x‖₁, tr(x^p)}`
/// for PSD `a`, `x` and `p ≥ 2`. At the boundary `p = 2` the report is
/// tagged `diff-inequality:p2-boundary` so downstream tallies can keep the
/// genuinely-convex range separate.
pub fn check_diff_inequality(
    a: &SquareMatrix,
    x: &SquareMatrix,
    p: PNorm,
    seed: u64,
) -> Result<CheckReport> {
    let pv = require_finite_at_least(p, 2.0, "the difference inequality")?;
    let lhs = trace_power(&(a + x), pv)? - trace_power(a, pv)?;
    let weighted = schatten_norm(&(&psd_power(a, pv - 1.0)? * x), PNorm::new(1.0)?);
    let rhs = pv * 2f64.powf(pv - 1.0) * weighted.max(trace_power(x, pv)?);
    let name = if pv == 2.0 {
        "diff-inequality:p2-boundary"
    } else {
        "diff-inequality"
    };
    Ok(CheckReport::new(
        name,
        digest_matrices(&[a, x]),
        lhs,
        rhs,
        DIFF_TOL * rhs.abs().max(1.0),
        seed,
        vec![pv],
    ))
}

/// Certifies the operator-convexity refinement valid for `p ∈ [2, 3]`:
/// `tr((a+x)^p) − tr(a^p) ≤ (p(2^{p−1}−1)/(p−1))·(tr(a^{p−1}x) + tr(x^p))`.
pub fn check_operator_convexity(
    a: &SquareMatrix,
    x: &SquareMatrix,
    p: PNorm,
    seed: u64,
) -> Result<CheckReport> {
    let pv = require_finite_at_least(p, 2.0, "the convexity refinement")?;
    if pv > 3.0 {
        return Err(Error::bad_exponents(format!(
            "the convexity refinement holds on 2 ≤ p ≤ 3, got p = {pv}"
        )));
    }
    let lhs = trace_power(&(a + x), pv)? - trace_power(a, pv)?;
    let cross = trace_pair(&psd_power(a, pv - 1.0)?, x)?.re;
    let constant = pv * (2f64.powf(pv - 1.0) - 1.0) / (pv - 1.0);
    let rhs = constant * (cross + trace_power(x, pv)?);
    Ok(CheckReport::new(
        "operator-convexity",
        digest_matrices(&[a, x]),
        lhs,
        rhs,
        DIFF_TOL * rhs.abs().max(1.0),
        seed,
        vec![pv],
    ))
}

/// Certifies the integral representation
/// `tr((a+x)^p) − tr(a^p) = p·∫₀¹ tr((a+tx)^{p−1} x) dt`
/// on PSD pairs with 32-node Gauss–Legendre quadrature; the report's
/// left-hand side is the relative residual and the right-hand side the
/// allowed `1e-7`.
pub fn check_diff_integral(
    a: &SquareMatrix,
    x: &SquareMatrix,
    p: PNorm,
    seed: u64,
) -> Result<CheckReport> {
    let pv = require_finite_at_least(p, 2.0, "the integral identity")?;
    hermitian_eigen(x)?;
    let difference = trace_power(&(a + x), pv)? - trace_power(a, pv)?;
    // Both endpoints are PSD (validated just above), so the convex
    // combination a + tx stays PSD along the whole path and the integrand
    // is well defined at every quadrature node; a failure there would be a
    // genuine numerical breakdown, surfaced as NaN below.
    let integrand = |t: f64| -> f64 {
        psd_power(&(a + &x.scaled_real(t)), pv - 1.0)
            .and_then(|m| trace_pair(&m, x))
            .map_or(f64::NAN, |v| v.re)
    };
    let integral = pv * integrate(integrand, 0.0, 1.0, 32);
    if !integral.is_finite() {
        return Err(Error::MalformedData {
            reason: "integral representation hit an undefined fractional power".into(),
        });
    }
    let scale = difference.abs().max(1.0);
    Ok(CheckReport::new(
        "diff-integral",
        digest_matrices(&[a, x]),
        (difference - integral).abs() / scale,
        INTEGRAL_TOL,
        0.0,
        seed,
        vec![pv],
    ))
}

/// Certifies the Araki–Kosaki comparison `‖a^η b^η‖_{q/η} ≤ ‖ab‖_q^η`
/// for PSD `a`, `b`, `η ∈ (0, 1]` and `q ≥ 1` (including `q = ∞`).
pub fn check_araki_kosaki(
    a: &SquareMatrix,
    b: &SquareMatrix,
    eta: f64,
    q: PNorm,
    seed: u64,
) -> Result<CheckReport> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::bad_exponents(format!(
            "Araki–Kosaki needs η ∈ (0, 1], got η = {eta}"
        )));
    }
    let outer = match q {
        PNorm::Infinity => PNorm::Infinity,
        PNorm::Finite(qv) => PNorm::new(qv / eta)?,
    };
    let lhs = schatten_norm(&(&psd_power(a, eta)? * &psd_power(b, eta)?), outer);
    let rhs = schatten_norm(&(a * b), q).powf(eta);
    // The exponent is recorded as its reciprocal so q = ∞ stays a plain
    // JSON number (1/q = 0) in the NDJSON report stream.
    Ok(CheckReport::new(
        "araki-kosaki",
        digest_matrices(&[a, b]),
        lhs,
        rhs,
        ARAKI_KOSAKI_TOL * rhs.abs().max(1.0),
        seed,
        vec![q.reciprocal(), eta],
    ))
}

/// Certifies the trace formula for the derivative of `s ↦ tr((a+sx)^p)`
/// against a central difference with step [`DERIVATIVE_STEP`]: the value is
/// `p·tr((a+sx)^{p−1} x)`. Both probe points `a + (s ± h)x` must be PSD,
/// otherwise the fractional power is undefined and the checker refuses.
pub fn check_derivative(
    a: &SquareMatrix,
    x: &SquareMatrix,
    p: PNorm,
    s: f64,
    seed: u64,
) -> Result<CheckReport> {
    let pv = match p {
        PNorm::Finite(v) if v > 1.0 => v,
        _ => {
            return Err(Error::bad_exponents(format!(
                "the derivative formula needs finite p > 1, got p = {p}"
            )))
        }
    };
    if !s.is_finite() {
        return Err(Error::bad_exponents(format!(
            "the base point must be finite, got s = {s}"
        )));
    }
    let h = DERIVATIVE_STEP;
    let at = |t: f64| -> SquareMatrix { a + &x.scaled_real(t) };
    let upper = trace_power(&at(s + h), pv)?;
    let lower = trace_power(&at(s - h), pv)?;
    let quotient = (upper - lower) / (2.0 * h);
    let analytic = pv * trace_pair(&psd_power(&at(s), pv - 1.0)?, x)?.re;
    Ok(CheckReport::new(
        "derivative",
        digest_matrices(&[a, x]),
        (quotient - analytic).abs(),
        0.0,
        DERIVATIVE_TOL * analytic.abs().max(1.0),
        seed,
        vec![pv, s, h],
    ))
}

/// Splits `x` into four PSD parts with `x = x₀ − x₂ + i·(x₁ − x₃)`,
/// i.e. `x = Σ_k i^k x_k`: positive and negative parts of the real and
/// imaginary Hermitian components.
pub fn positive_split(x: &SquareMatrix) -> Result<[SquareMatrix; 4]> {
    let adj = x.adjoint();
    let re = (&(x + &adj)).scaled_real(0.5);
    let im = (&(x - &adj)).scaled(Complex64::new(0.0, -0.5));
    let pos = |m: &SquareMatrix| func_calculus(m, |t| t.max(0.0));
    let neg = |m: &SquareMatrix| func_calculus(m, |t| (-t).max(0.0));
    Ok([pos(&re)?, pos(&im)?, neg(&re)?, neg(&im)?])
}

/// Certifies the positive-part splitting: the four parts resum to `x`
/// within `1e-12` relative Frobenius error, and each part's
/// `L_p(t, d)`-norm does not exceed the norm of `x` beyond `1e-10`
/// relative. Both defects are folded into a single left-hand side on the
/// resummation scale so one number bounds the worst violation.
pub fn check_positive_split(
    x: &SquareMatrix,
    d: &Density,
    p: PNorm,
    t: f64,
    seed: u64,
) -> Result<CheckReport> {
    let parts = positive_split(x)?;
    let mut resum = SquareMatrix::zeros(x.dim());
    for (k, part) in parts.iter().enumerate() {
        let phase = match k {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        resum = &resum + &part.scaled(phase);
    }
    let scale = x.frobenius_norm();
    let resid = if scale == 0.0 {
        resum.frobenius_norm()
    } else {
        (&resum - x).frobenius_norm() / scale
    };
    let whole = ptd_norm(x, d, p, t)?;
    let mut worst_ratio = 0.0f64;
    for part in &parts {
        let value = ptd_norm(part, d, p, t)?;
        if whole > 0.0 {
            worst_ratio = worst_ratio.max(value / whole);
        } else if value > 0.0 {
            worst_ratio = f64::INFINITY;
        }
    }
    let lhs = resid.max((worst_ratio - 1.0) * (SPLIT_RESUM_TOL / SPLIT_CONTRACTION_TOL));
    // Exponent recorded as a reciprocal so p = ∞ stays JSON-representable.
    Ok(CheckReport::new(
        "positive-split",
        digest_matrices(&[x, d.matrix()]),
        lhs,
        SPLIT_RESUM_TOL,
        0.0,
        seed,
        vec![p.reciprocal(), t, resid, worst_ratio],
    ))
}
