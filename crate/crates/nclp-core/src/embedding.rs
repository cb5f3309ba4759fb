//! The change-of-density embedding: solving `x = d^α u + u d^α`.
//!
//! With `α = 1/q − 1/p` the solution is blockwise division by
//! `d_i^α + d_j^α` — a Sylvester-type solve in the density eigenbasis —
//! on the supported corner, and a one-sided pseudo-inverse weight on the
//! two mixed corners. The fourth corner `(1−e)x(1−e)` is annihilated by
//! every weight and must vanish for the embedding to be well defined; that
//! precondition is enforced, not patched over.
//!
//! On top of the pointwise solve sit subspace utilities: basis validation,
//! batch embedding with a loud reconstruction check, and a seeded
//! distortion estimate for the embedded image of a subspace.

use rayon::prelude::*;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::matcore::{schatten_norm, PNorm, SquareMatrix};
use crate::sample;
use crate::schur::{schur_apply, MultiplierSymbol};
use crate::spaces::exponent_gap;

/// Relative Frobenius tolerance on the forbidden corner `(1−e)x(1−e)`.
const CORNER_TOL: f64 = 1e-10;

/// Relative tolerance on reconstruction residuals of embedded bases.
const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Solves `x = d^α u + u d^α` for `u`, with `α = 1/q − 1/p`:
/// the supported corner gets the resolvent symbol `(d_i^α + d_j^α)^{−1}`,
/// the mixed corners `ex(1−e)` and `(1−e)xe` get `d^{−α}` on their
/// supported side, and the forbidden corner must already vanish.
pub fn embed_u(x: &SquareMatrix, d: &Density, q: PNorm, p: PNorm) -> Result<SquareMatrix> {
    let alpha = exponent_gap(q, p)?;
    if x.dim() != d.dim() {
        return Err(Error::DimMismatch {
            expected: d.dim(),
            found: x.dim(),
        });
    }
    let e = d.support_projection();
    let ex = &e * x;
    let exe = &ex * &e;
    let corner_mass = (&(x - &ex) - &(&(x * &e) - &exe)).frobenius_norm();
    let corner_tol = CORNER_TOL * x.frobenius_norm();
    if corner_mass > corner_tol {
        return Err(Error::CornerNotAnnihilated {
            mass: corner_mass,
            tol: corner_tol,
        });
    }
    let diagonal = schur_apply(
        x,
        d.blocks(),
        &MultiplierSymbol::symmetric(move |a, b| 1.0 / (a.powf(alpha) + b.powf(alpha))),
    )?;
    if d.kernel_dim() == 0 {
        return Ok(diagonal);
    }
    let w_inv = d.power(-alpha);
    let upper_right = &ex - &exe; // e x (1−e)
    let lower_left = &(x * &e) - &exe; // (1−e) x e
    Ok(&(&diagonal + &(&w_inv * &upper_right)) + &(&lower_left * &w_inv))
}

/// The left inverse: `d^α u + u d^α` with `α = 1/q − 1/p`. Composed with
/// [`embed_u`] it reproduces the three allowed corners of the input.
pub fn reconstruct(u: &SquareMatrix, d: &Density, q: PNorm, p: PNorm) -> Result<SquareMatrix> {
    let alpha = exponent_gap(q, p)?;
    if u.dim() != d.dim() {
        return Err(Error::DimMismatch {
            expected: d.dim(),
            found: u.dim(),
        });
    }
    let w = d.power(alpha);
    Ok(&(&w * u) + &(u * &w))
}

/// A linearly independent family of matrices spanning a subspace of the
/// ambient algebra, validated through its Frobenius Gram matrix.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    dim_ambient: usize,
    vectors: Vec<SquareMatrix>,
}

impl SubspaceBasis {
    /// Validates dimensions and numerical independence: the Gram matrix of
    /// Frobenius inner products must have eigenvalue ratio ≥ 1e-10.
    pub fn new(vectors: Vec<SquareMatrix>) -> Result<Self> {
        let first = vectors.first().ok_or_else(|| Error::MalformedData {
            reason: "subspace basis must contain at least one matrix".into(),
        })?;
        let dim_ambient = first.dim();
        if let Some(bad) = vectors.iter().find(|v| v.dim() != dim_ambient) {
            return Err(Error::DimMismatch {
                expected: dim_ambient,
                found: bad.dim(),
            });
        }
        let k = vectors.len();
        let mut gram = nalgebra::DMatrix::<num_complex::Complex64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                // ⟨b_i, b_j⟩ = tr(b_j* b_i), the Frobenius pairing.
                gram[(i, j)] = (vectors[j].adjoint().data() * vectors[i].data()).trace();
            }
        }
        let eig = crate::matcore::hermitian_eigen(&SquareMatrix::from_data(gram)?)?;
        let min_eig = *eig.eigenvalues.first().expect("gram is nonempty");
        let max_eig = *eig.eigenvalues.last().expect("gram is nonempty");
        if min_eig < 1e-10 * max_eig {
            return Err(Error::DegenerateBasis { min_eig, max_eig });
        }
        Ok(Self {
            dim_ambient,
            vectors,
        })
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[SquareMatrix] {
        &self.vectors
    }
}

/// The embedding applied to a whole subspace: the images of the basis
/// vectors, the weight exponent, and the worst reconstruction residual
/// (which is re-verified at construction — a residual above 1e-8 relative
/// aborts rather than producing a silently broken embedding).
#[derive(Clone, Debug)]
pub struct EmbeddingResult {
    images: Vec<SquareMatrix>,
    alpha: f64,
    support_rank: usize,
    reconstruction_residual: f64,
}

impl EmbeddingResult {
    pub fn images(&self) -> &[SquareMatrix] {
        &self.images
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn support_rank(&self) -> usize {
        self.support_rank
    }

    /// Worst relative residual `‖d^α u(b) + u(b) d^α − b‖₂/‖b‖₂` over the
    /// basis.
    pub fn reconstruction_residual(&self) -> f64 {
        self.reconstruction_residual
    }
}

/// Embeds every basis vector and verifies the round trip on each.
pub fn embed_subspace(
    basis: &SubspaceBasis,
    d: &Density,
    q: PNorm,
    p: PNorm,
) -> Result<EmbeddingResult> {
    let alpha = exponent_gap(q, p)?;
    let mut images = Vec::with_capacity(basis.len());
    let mut worst = 0.0f64;
    for b in basis.vectors() {
        let u = embed_u(b, d, q, p)?;
        let back = reconstruct(&u, d, q, p)?;
        let denom = b.frobenius_norm();
        let residual = if denom == 0.0 {
            0.0
        } else {
            (&back - b).frobenius_norm() / denom
        };
        if residual > RECONSTRUCTION_TOL {
            return Err(Error::ReconstructionFailed {
                residual,
                tol: RECONSTRUCTION_TOL,
            });
        }
        worst = worst.max(residual);
        images.push(u);
    }
    Ok(EmbeddingResult {
        images,
        alpha,
        support_rank: d.support_rank(),
        reconstruction_residual: worst,
    })
}

/// Sampled distortion of the embedded subspace: extreme values of
/// `‖u(x)‖_p/‖x‖_q` over random complex combinations of the basis.
#[derive(Clone, Copy, Debug)]
pub struct DistortionEstimate {
    pub lower: f64,
    pub upper: f64,
}

/// Runs `trials` seeded random combinations and returns the observed
/// min/max of `‖u(x)‖_p/‖x‖_q`. Linearity of the embedding lets each
/// trial combine precomputed basis images instead of re-solving.
/// Deterministic per seed; trials parallelize and reduce by min/max.
pub fn subspace_distortion(
    basis: &SubspaceBasis,
    d: &Density,
    q: PNorm,
    p: PNorm,
    trials: usize,
    seed: u64,
) -> Result<DistortionEstimate> {
    if trials == 0 {
        return Err(Error::MalformedData {
            reason: "distortion sampling needs at least one trial".into(),
        });
    }
    let embedded = embed_subspace(basis, d, q, p)?;
    let k = basis.len();
    let n = basis.dim_ambient();
    let (lower, upper) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sample::trial_rng(seed, t as u64);
            let coeffs: Vec<num_complex::Complex64> =
                (0..k).map(|_| sample::gaussian_entry(&mut rng)).collect();
            let mut x = SquareMatrix::zeros(n);
            let mut ux = SquareMatrix::zeros(n);
            for (c, (b, ub)) in coeffs
                .iter()
                .zip(basis.vectors().iter().zip(embedded.images().iter()))
            {
                x = &x + &b.scaled(*c);
                ux = &ux + &ub.scaled(*c);
            }
            let denom = schatten_norm(&x, q);
            if denom <= 1e-300 {
                (f64::INFINITY, 0.0) // degenerate draw: neutral for min/max
            } else {
                let r = schatten_norm(&ux, p) / denom;
                (r, r)
            }
        })
        .reduce(
            || (f64::INFINITY, 0.0),
            |(lo1, hi1), (lo2, hi2)| (lo1.min(lo2), hi1.max(hi2)),
        );
    Ok(DistortionEstimate { lower, upper })
}

/// The balancing parameter for `max{t^{1/p−1/q}·α, t^{1−1/q}·β}` with
/// `2 ≤ q < p < ∞`: the max is minimized at `t* = (α/β)^{p'}` where both
/// branches meet, giving the value `α^{p'/q'}·β^{1−p'/q'}`.
pub fn balance_parameter(alpha: f64, beta: f64, p: PNorm, q: PNorm) -> Result<(f64, f64)> {
    if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
        return Err(Error::bad_exponents(format!(
            "balance inputs must be positive finite, got α = {alpha}, β = {beta}"
        )));
    }
    if p.is_infinite() || q.value() < 2.0 || q.value() >= p.value() {
        return Err(Error::bad_exponents(format!(
            "balance needs 2 ≤ q < p < ∞, got q = {q}, p = {p}"
        )));
    }
    let p_prime = p.conjugate().value();
    let q_prime = q.conjugate().value();
    let t_star = (alpha / beta).powf(p_prime);
    let value = alpha.powf(p_prime / q_prime) * beta.powf(1.0 - p_prime / q_prime);
    Ok((t_star, value))
}

/// Heuristic density from a subspace basis: the normalized symmetric mean
/// `Σ_k (b_k* b_k + b_k b_k*)/2`. Its support contains every corner a
/// basis vector touches, so the embedding's corner precondition holds —
/// but it carries no optimality claim whatsoever.
pub fn heuristic_density(basis: &SubspaceBasis) -> Result<Density> {
    let n = basis.dim_ambient();
    let mut acc = SquareMatrix::zeros(n);
    for b in basis.vectors() {
        let sym = (&(&b.adjoint() * b) + &(b * &b.adjoint())).scaled_real(0.5);
        acc = &acc + &sym;
    }
    crate::density::make_density(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_density, power_weight};
    use crate::matcore::func_calculus;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn p(v: f64) -> PNorm {
        PNorm::new(v).unwrap()
    }

    #[test]
    fn scalar_case_halves() {
        let d = make_density(&SquareMatrix::identity(1)).unwrap();
        let x = SquareMatrix::from_real_diag(&[4.0]);
        // α = 1/2 and d = 1: u = x/(1+1).
        let u = embed_u(&x, &d, p(1.0), p(2.0)).unwrap();
        assert_relative_eq!(u.entry(0, 0).re, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn single_block_pair_formula() {
        // x supported on the (1,2) block: u = x/(d_1^α + d_2^α).
        let d = make_density(&SquareMatrix::from_real_diag(&[0.25, 0.75])).unwrap();
        let x = SquareMatrix::from_fn(2, |i, j| {
            Complex64::new(if (i, j) == (0, 1) { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let (q, pp) = (p(1.0), p(4.0));
        let alpha = exponent_gap(q, pp).unwrap(); // 3/4
        let u = embed_u(&x, &d, q, pp).unwrap();
        let expected = 1.0 / (0.25f64.powf(alpha) + 0.75f64.powf(alpha));
        assert_relative_eq!(u.entry(0, 1).re, expected, max_relative = 1e-13);
    }

    #[test]
    fn roundtrip_on_full_support() {
        let mut rng = sample::trial_rng(130, 0);
        for _ in 0..25 {
            let d = sample::density_with_condition(6, 1e4, &mut rng);
            let x = sample::gaussian_matrix(6, &mut rng);
            let u = embed_u(&x, &d, p(1.0), p(1.5)).unwrap();
            let back = reconstruct(&u, &d, p(1.0), p(1.5)).unwrap();
            let rel = (&back - &x).frobenius_norm() / x.frobenius_norm();
            assert!(rel <= 1e-8, "roundtrip residual {rel:.3e}");
        }
    }

    #[test]
    fn embedding_is_linear() {
        let mut rng = sample::trial_rng(131, 0);
        let d = sample::density(5, &mut rng);
        let x = sample::gaussian_matrix(5, &mut rng);
        let y = sample::gaussian_matrix(5, &mut rng);
        let c = Complex64::new(-1.3, 0.4);
        let lhs = embed_u(&(&x.scaled(c) + &y), &d, p(1.2), p(2.0)).unwrap();
        let rhs = &embed_u(&x, &d, p(1.2), p(2.0)).unwrap().scaled(c)
            + &embed_u(&y, &d, p(1.2), p(2.0)).unwrap();
        assert!((&lhs - &rhs).frobenius_norm() <= 1e-11);
    }

    #[test]
    fn commuting_input_uses_scalar_calculus() {
        // x = f(d) commutes with d: u = x/(2 d^α) by functional calculus.
        let mut rng = sample::trial_rng(132, 0);
        let d = sample::density_with_condition(6, 100.0, &mut rng);
        let x = func_calculus(d.matrix(), |t| t / (1.0 + t)).unwrap();
        let (q, pp) = (p(1.0), p(3.0));
        let alpha = exponent_gap(q, pp).unwrap();
        let u = embed_u(&x, &d, q, pp).unwrap();
        let oracle = &x * &func_calculus(d.matrix(), |t| 0.5 * t.powf(-alpha)).unwrap();
        let rel = (&u - &oracle).frobenius_norm() / oracle.frobenius_norm();
        assert!(rel <= 1e-10, "commuting oracle residual {rel:.3e}");
    }

    #[test]
    fn reconstruct_of_zero_and_scalar_weight() {
        let mut rng = sample::trial_rng(133, 0);
        let d = make_density(&SquareMatrix::identity(4)).unwrap();
        let zero = SquareMatrix::zeros(4);
        assert_eq!(
            reconstruct(&zero, &d, p(1.0), p(2.0)).unwrap().frobenius_norm(),
            0.0
        );
        // d = I/n: reconstruct(u) = 2·(1/n)^α·u.
        let u = sample::gaussian_matrix(4, &mut rng);
        let alpha = exponent_gap(p(1.0), p(2.0)).unwrap();
        let back = reconstruct(&u, &d, p(1.0), p(2.0)).unwrap();
        let expected = u.scaled_real(2.0 * 0.25f64.powf(alpha));
        assert!((&back - &expected).frobenius_norm() <= 1e-13);
    }

    #[test]
    fn singular_support_reconstructs_three_corners() {
        let mut rng = sample::trial_rng(134, 0);
        let d = sample::rank_deficient_density(6, 4, 100.0, &mut rng);
        let e = d.support_projection();
        let g = sample::gaussian_matrix(6, &mut rng);
        // Strip the forbidden corner; everything else must come back.
        let ge = &g * &e;
        let eg = &e * &g;
        let ege = &(&e * &g) * &e;
        let x = &(&(&eg + &ge) - &ege); // exe + ex(1−e) + (1−e)xe
        let u = embed_u(x, &d, p(1.0), p(2.0)).unwrap();
        let back = reconstruct(&u, &d, p(1.0), p(2.0)).unwrap();
        let rel = (&back - x).frobenius_norm() / x.frobenius_norm();
        assert!(rel <= 1e-8, "three-corner roundtrip residual {rel:.3e}");
    }

    #[test]
    fn forbidden_corner_is_rejected() {
        let mut rng = sample::trial_rng(135, 0);
        let d = sample::rank_deficient_density(5, 3, 10.0, &mut rng);
        let g = sample::gaussian_matrix(5, &mut rng);
        // A dense matrix has mass in all four corners.
        let err = embed_u(&g, &d, p(1.0), p(2.0)).unwrap_err();
        assert!(matches!(err, Error::CornerNotAnnihilated { .. }));
    }

    #[test]
    fn supported_input_stays_supported() {
        let mut rng = sample::trial_rng(136, 0);
        let d = sample::rank_deficient_density(6, 4, 50.0, &mut rng);
        let e = d.support_projection();
        let g = sample::gaussian_matrix(6, &mut rng);
        let x = &(&e * &g) * &e;
        let u = embed_u(&x, &d, p(1.0), p(1.5)).unwrap();
        let off = d.blocks().off_support_mass(&u).unwrap();
        assert!(off <= 1e-12, "embedding leaked off-support mass {off:.3e}");
    }

    #[test]
    fn embedding_bound_is_dimension_stable() {
        // ‖u(x)‖_p ≤ 3·‖d^{−α}x‖_p blockwise, uniformly in the dimension;
        // the sampled sup of the dual-weighted ratio must not grow by more
        // than 2× from n = 2 to n = 16.
        for pp in [p(1.25), p(1.5)] {
            let q = p(1.0);
            let alpha = exponent_gap(q, pp).unwrap();
            let sup_at = |n: usize, seed: u64| -> f64 {
                let mut rng = sample::trial_rng(seed, 0);
                let mut sup = 0.0f64;
                for _ in 0..40 {
                    let d = sample::density_with_condition(n, 1e4, &mut rng);
                    let x = sample::gaussian_matrix(n, &mut rng);
                    let u = embed_u(&x, &d, q, pp).unwrap();
                    let w_inv = power_weight(&d, -alpha);
                    let denom = schatten_norm(&(&w_inv * &x), pp)
                        .max(schatten_norm(&(&x * &w_inv), pp));
                    sup = sup.max(schatten_norm(&u, pp) / denom);
                }
                sup
            };
            let small = sup_at(2, 137);
            let large = sup_at(16, 138);
            assert!(large <= 3.0 * (1.0 + 1e-9), "provable bound broken: {large}");
            assert!(
                large <= 2.0 * small,
                "dual-weighted ratio grew too fast: {small} → {large} at p = {pp}"
            );
        }
    }

    #[test]
    fn basis_validation_rejects_dependence() {
        let mut rng = sample::trial_rng(139, 0);
        let a = sample::gaussian_matrix(3, &mut rng);
        let b = sample::gaussian_matrix(3, &mut rng);
        let dependent = &a.scaled_real(2.0) - &b.scaled_real(0.0); // = 2a
        let err = SubspaceBasis::new(vec![a.clone(), b.clone(), dependent]).unwrap_err();
        assert!(matches!(err, Error::DegenerateBasis { .. }));
        assert!(SubspaceBasis::new(vec![a, b]).is_ok());
        assert!(SubspaceBasis::new(vec![]).is_err());
    }

    #[test]
    fn one_dimensional_distortion_is_a_point() {
        let mut rng = sample::trial_rng(140, 0);
        let d = sample::density(4, &mut rng);
        let x = sample::gaussian_matrix(4, &mut rng);
        let basis = SubspaceBasis::new(vec![x.clone()]).unwrap();
        let (q, pp) = (p(1.0), p(1.25));
        let est = subspace_distortion(&basis, &d, q, pp, 64, 141).unwrap();
        let u = embed_u(&x, &d, q, pp).unwrap();
        let point = schatten_norm(&u, pp) / schatten_norm(&x, q);
        assert_relative_eq!(est.lower, point, max_relative = 1e-12);
        assert_relative_eq!(est.upper, point, max_relative = 1e-12);
    }

    #[test]
    fn commuting_block_distortion_matches_scalar_symbols() {
        // d diagonal with two blocks; basis vectors each live in one
        // diagonal block, so u scales block k by 1/(2 d_k^α) exactly and
        // the distortion of each sampled combination is computable from
        // the scalar symbols.
        let d = make_density(&SquareMatrix::from_real_diag(&[0.1, 0.1, 0.4, 0.4])).unwrap();
        let mut rng = sample::trial_rng(142, 0);
        let h1 = sample::hermitian(2, &mut rng);
        let h2 = sample::hermitian(2, &mut rng);
        let lift = |h: &SquareMatrix, offset: usize| {
            SquareMatrix::from_fn(4, |i, j| {
                if (offset..offset + 2).contains(&i) && (offset..offset + 2).contains(&j) {
                    h.entry(i - offset, j - offset)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .unwrap()
        };
        let b1 = lift(&h1, 0);
        let b2 = lift(&h2, 2);
        let basis = SubspaceBasis::new(vec![b1.clone(), b2.clone()]).unwrap();
        let (q, pp) = (p(1.0), p(2.0));
        let alpha = exponent_gap(q, pp).unwrap();
        let est = subspace_distortion(&basis, &d, q, pp, 200, 143).unwrap();
        // Replay the same trial stream through the scalar formula.
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for t in 0..200u64 {
            let mut rng = sample::trial_rng(143, t);
            let c1 = sample::gaussian_entry(&mut rng);
            let c2 = sample::gaussian_entry(&mut rng);
            let x = &b1.scaled(c1) + &b2.scaled(c2);
            let ux = &b1.scaled(c1 / (2.0 * 0.1f64.powf(alpha)))
                + &b2.scaled(c2 / (2.0 * 0.4f64.powf(alpha)));
            let r = schatten_norm(&ux, pp) / schatten_norm(&x, q);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        assert_relative_eq!(est.lower, lo, max_relative = 1e-10);
        assert_relative_eq!(est.upper, hi, max_relative = 1e-10);
    }

    #[test]
    fn random_subspace_distortion_is_finite_and_positive() {
        let mut rng = sample::trial_rng(144, 0);
        let d = sample::density(8, &mut rng);
        let basis = SubspaceBasis::new(vec![
            sample::gaussian_matrix(8, &mut rng),
            sample::gaussian_matrix(8, &mut rng),
            sample::gaussian_matrix(8, &mut rng),
        ])
        .unwrap();
        let est = subspace_distortion(&basis, &d, p(1.0), p(1.25), 2000, 145).unwrap();
        assert!(est.lower > 0.0);
        assert!(est.upper.is_finite());
        assert!(est.upper >= est.lower);
    }

    #[test]
    fn balance_parameter_closed_forms() {
        let (t, v) = balance_parameter(1.7, 1.7, p(3.0), p(2.0)).unwrap();
        assert_relative_eq!(t, 1.0, max_relative = 1e-14);
        assert_relative_eq!(v, 1.7, max_relative = 1e-14);
        // α=2, β=1, p=4 (p'=4/3), q=2 (q'=2): t* = 2^{4/3}, value = 2^{2/3}.
        let (t, v) = balance_parameter(2.0, 1.0, p(4.0), p(2.0)).unwrap();
        assert_relative_eq!(t, 2.0f64.powf(4.0 / 3.0), max_relative = 1e-14);
        assert_relative_eq!(v, 2.0f64.powf(2.0 / 3.0), max_relative = 1e-14);
    }

    #[test]
    fn balance_parameter_is_grid_optimal() {
        let mut rng = sample::trial_rng(146, 0);
        for _ in 0..20 {
            let alpha = sample::gaussian_entry(&mut rng).norm() + 0.1;
            let beta = sample::gaussian_entry(&mut rng).norm() + 0.1;
            let qv = 2.0 + sample::gaussian_entry(&mut rng).norm();
            let pv = qv + 0.5 + sample::gaussian_entry(&mut rng).norm();
            let (q, pp) = (p(qv), p(pv));
            let (_, value) = balance_parameter(alpha, beta, pp, q).unwrap();
            let objective = |t: f64| {
                (t.powf(1.0 / pv - 1.0 / qv) * alpha).max(t.powf(1.0 - 1.0 / qv) * beta)
            };
            let grid_min = (0..1000)
                .map(|i| objective(10f64.powf(-6.0 + 12.0 * i as f64 / 999.0)))
                .fold(f64::INFINITY, f64::min);
            assert!(
                grid_min >= value * (1.0 - 1e-6),
                "grid found a better point: {grid_min} < {value}"
            );
        }
    }

    #[test]
    fn balance_parameter_rejects_out_of_range() {
        assert!(balance_parameter(1.0, 1.0, p(4.0), p(1.5)).is_err()); // q < 2
        assert!(balance_parameter(1.0, 1.0, PNorm::Infinity, p(2.0)).is_err());
        assert!(balance_parameter(1.0, 1.0, p(2.0), p(2.0)).is_err());
        assert!(balance_parameter(0.0, 1.0, p(4.0), p(2.0)).is_err());
    }

    #[test]
    fn heuristic_density_supports_the_basis() {
        let mut rng = sample::trial_rng(147, 0);
        // Basis supported on the top-left 2×2 corner of M_4.
        let h = sample::hermitian(2, &mut rng);
        let b = SquareMatrix::from_fn(4, |i, j| {
            if i < 2 && j < 2 {
                h.entry(i, j)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let basis = SubspaceBasis::new(vec![b.clone()]).unwrap();
        let d = heuristic_density(&basis).unwrap();
        assert_eq!(d.support_rank(), 2);
        // The corner precondition holds, so embedding succeeds.
        assert!(embed_u(&b, &d, p(1.0), p(2.0)).is_ok());
    }
}
