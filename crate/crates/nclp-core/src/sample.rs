//! Seeded random matrix generation.
//!
//! Reports produced by this toolkit are scientific artifacts, so every random
//! draw must be reproducible across platforms and across thread schedules.
//! The generator is ChaCha8 (a named counter-based stream cipher RNG): a
//! master seed picks the key and each independent unit of work gets its own
//! stream via [`trial_rng`], making results independent of evaluation order.
//!
//! Nothing here is statistically delicate — checks hold for *all* inputs, so
//! the distributions only need to explore the space, not match a law.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

// The generator type is part of this module's public signatures, so
// downstream crates can name it without depending on the RNG crate.
pub use rand_chacha::ChaCha8Rng;

use crate::density::{make_density, Density};
use crate::matcore::SquareMatrix;

/// RNG for one unit of work: `seed` selects the key, `stream` the counter
/// stream, so trials indexed by `stream` are mutually independent and the
/// whole schedule is deterministic.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One standard complex Gaussian entry: independent N(0,1) real and
/// imaginary parts.
pub fn gaussian_entry(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Dense `n×n` matrix with standard complex Gaussian entries.
pub fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    SquareMatrix::from_fn(n, |_, _| gaussian_entry(rng)).expect("gaussian entries are finite")
}

/// Hermitian sample `(G + G*)/2`.
pub fn hermitian(n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let g = gaussian_matrix(n, rng);
    (&g + &g.adjoint()).scaled_real(0.5)
}

/// PSD Wishart-type sample `G G*/n`.
pub fn psd(n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let g = gaussian_matrix(n, rng);
    (&g * &g.adjoint()).scaled_real(1.0 / n as f64)
}

/// PSD sample shifted to be strictly positive definite (smallest eigenvalue
/// bounded below by `ridge` times the identity). Used where a later step
/// subtracts a small multiple of another PSD matrix and must stay PSD.
pub fn positive_definite(n: usize, ridge: f64, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let base = psd(n, rng);
    &base + &SquareMatrix::identity(n).scaled_real(ridge)
}

/// Haar-ish random unitary: Q factor of a complex Gaussian matrix, with the
/// phases fixed so the distribution does not depend on the QR convention.
pub fn unitary(n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let g = gaussian_matrix(n, rng);
    let qr = g.data().clone().qr();
    let q = qr.q();
    let r = qr.r();
    // Normalize column phases by the sign of R's diagonal.
    let mut q = q.clone();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    SquareMatrix::from_data(q).expect("Q factor entries are finite")
}

/// Full-support density with eigenvalue spread bounded by `max_condition`:
/// eigenvalues `max_condition^{u_k}` for uniform `u_k`, conjugated by a
/// random unitary and normalized to trace one.
pub fn density_with_condition(
    n: usize,
    max_condition: f64,
    rng: &mut ChaCha8Rng,
) -> Density {
    assert!(max_condition >= 1.0, "condition bound must be ≥ 1");
    let mut eigs: Vec<f64> = (0..n)
        .map(|_| max_condition.powf(rng.gen::<f64>()))
        .collect();
    let total: f64 = eigs.iter().sum();
    for e in eigs.iter_mut() {
        *e /= total;
    }
    let u = unitary(n, rng);
    let diag = SquareMatrix::from_real_diag(&eigs);
    let d = &(&u * &diag) * &u.adjoint();
    make_density(&d).expect("constructed matrix is PSD with positive trace")
}

/// Random density (normalized Wishart); may be ill-conditioned.
pub fn density(n: usize, rng: &mut ChaCha8Rng) -> Density {
    make_density(&psd(n, rng)).expect("Wishart samples are PSD with positive trace")
}

/// Rank-deficient density: `rank` positive eigenvalues with spread at most
/// `max_condition`, the rest of the spectrum exactly zero, in a random basis.
pub fn rank_deficient_density(
    n: usize,
    rank: usize,
    max_condition: f64,
    rng: &mut ChaCha8Rng,
) -> Density {
    assert!(rank >= 1 && rank < n, "rank must satisfy 1 ≤ rank < n");
    let mut eigs = vec![0.0f64; n - rank];
    let mut pos: Vec<f64> = (0..rank)
        .map(|_| max_condition.powf(rng.gen::<f64>()))
        .collect();
    let total: f64 = pos.iter().sum();
    for e in pos.iter_mut() {
        *e /= total;
    }
    eigs.extend(pos);
    let u = unitary(n, rng);
    let d = &(&u * &SquareMatrix::from_real_diag(&eigs)) * &u.adjoint();
    make_density(&d).expect("constructed matrix is PSD with positive trace")
}

/// Density with at most `max_blocks` distinct eigenvalues (each value
/// repeated on a random-size block), full support, spread ≤ `max_condition`.
/// Handy for exercising genuinely clustered block spectra.
pub fn blocky_density(
    n: usize,
    max_blocks: usize,
    max_condition: f64,
    rng: &mut ChaCha8Rng,
) -> Density {
    let m = rng.gen_range(1..=max_blocks.min(n));
    // Random composition of n into m positive parts.
    let mut sizes = vec![1usize; m];
    for _ in 0..(n - m) {
        sizes[rng.gen_range(0..m)] += 1;
    }
    let mut values: Vec<f64> = (0..m)
        .map(|_| max_condition.powf(rng.gen::<f64>()))
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut eigs = Vec::with_capacity(n);
    for (size, v) in sizes.iter().zip(values.iter()) {
        eigs.extend(std::iter::repeat(*v).take(*size));
    }
    let total: f64 = eigs.iter().sum();
    for e in eigs.iter_mut() {
        *e /= total;
    }
    let u = unitary(n, rng);
    let d = &(&u * &SquareMatrix::from_real_diag(&eigs)) * &u.adjoint();
    make_density(&d).expect("constructed matrix is PSD with positive trace")
}
