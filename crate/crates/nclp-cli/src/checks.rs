//! Per-check trial semantics: how one seeded trial of each check samples
//! its inputs, which records it emits, and which inputs are kept as
//! artifacts when a record fails.
//!
//! The unit of work is a *(cell, trial)* pair. [`grid`] expands a config
//! into its canonical cell list (dimension × exponent grids, in a fixed
//! order) and [`run_trial`] executes one trial of one cell with an RNG
//! stream derived from `(cell index, trial index)` — so any single record
//! can be reproduced in isolation from the config seed alone.
//!
//! Record-naming convention: a check that certifies several facts per
//! trial emits one record per fact, suffixed `name:fact`. Exponent slots
//! in `p_q_params` that may be infinite are stored as reciprocals (`1/p`,
//! so `∞ ↦ 0` stays a plain JSON number); slots that are finite by
//! precondition are stored raw.

use nclp_core::sample::{self, trial_rng};
use nclp_core::{
    balance_parameter, check_araki_kosaki, check_derivative, check_diff_inequality,
    check_diff_integral, check_operator_convexity, check_positive_split, digest_matrices,
    digest_params, discretize_with_constant, embed_u, hermitian_eigen, kernel_positivity_check,
    min_multiplier, qr_project, reconstruct, referee_components, resolvent_weighted,
    schatten_norm, triangular_complement, triangular_project, triangular_weighted_norm,
    BlockSpectrum, CheckReport, Density, Error, PNorm, Result, Side, SquareMatrix, TrianglePart,
};

use crate::config::{CheckKind, ExperimentConfig};

/// One point of a check's parameter grid. Only the slots the check uses
/// are populated; the rest stay `None`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Cell {
    pub dim: usize,
    pub p: Option<PNorm>,
    pub q: Option<PNorm>,
    pub r: Option<PNorm>,
    pub eta: Option<f64>,
    pub t: Option<f64>,
    /// Referee projection weight pair (α0, α1).
    pub alphas: Option<(f64, f64)>,
}

/// Everything a single trial produced: its records, plus the sampled
/// inputs (kept only when some record failed, so the failure can be
/// replayed from disk).
#[derive(Debug, Default)]
pub struct TrialOutput {
    pub reports: Vec<CheckReport>,
    pub artifacts: Vec<(&'static str, SquareMatrix)>,
}

/// RNG stream for a given task, so every (cell, trial) pair draws from
/// its own independent ChaCha stream.
pub fn stream_index(config: &ExperimentConfig, cell_index: usize, trial: usize) -> u64 {
    (cell_index * config.trials + trial) as u64
}

/// Expands the config into its canonical cell order: dimensions outermost,
/// then the exponent grids in the order (p, q, r, η/α, t, weight pair).
pub fn grid(config: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    let cell = |dim: usize| Cell {
        dim,
        ..Cell::default()
    };
    match config.check {
        CheckKind::SchurHalf => {
            for &n in &config.dims {
                for &p in &config.ps {
                    cells.push(Cell {
                        p: Some(p),
                        ..cell(n)
                    });
                }
            }
        }
        CheckKind::ResolventTriangular => {
            for &n in &config.dims {
                for &p in &config.ps {
                    for &eta in &config.etas {
                        cells.push(Cell {
                            p: Some(p),
                            eta: Some(eta),
                            ..cell(n)
                        });
                    }
                }
            }
        }
        CheckKind::QrIdentity => {
            for &n in &config.dims {
                for &p in &config.ps {
                    for &r in &config.rs {
                        cells.push(Cell {
                            p: Some(p),
                            r: Some(r),
                            ..cell(n)
                        });
                    }
                }
            }
        }
        CheckKind::Lambda => {
            for &n in &config.dims {
                for &q in &config.qs {
                    for &alpha in &config.etas {
                        cells.push(Cell {
                            q: Some(q),
                            eta: Some(alpha),
                            ..cell(n)
                        });
                    }
                }
            }
        }
        CheckKind::Referee => {
            const WEIGHT_PAIRS: [(f64, f64); 3] = [(0.0, 1.0), (1.0, 1.0), (0.3, 0.7)];
            for &n in &config.dims {
                for &q in &config.qs {
                    for pair in WEIGHT_PAIRS {
                        cells.push(Cell {
                            q: Some(q),
                            alphas: Some(pair),
                            ..cell(n)
                        });
                    }
                }
            }
        }
        CheckKind::DiffInequality | CheckKind::DiffIntegral => {
            for &n in &config.dims {
                for &p in &config.ps {
                    cells.push(Cell {
                        p: Some(p),
                        ..cell(n)
                    });
                }
            }
        }
        CheckKind::ArakiKosaki => {
            for &n in &config.dims {
                for &q in &config.qs {
                    for &eta in &config.etas {
                        cells.push(Cell {
                            q: Some(q),
                            eta: Some(eta),
                            ..cell(n)
                        });
                    }
                }
            }
        }
        CheckKind::Derivative => {
            for &n in &config.dims {
                for &p in &config.ps {
                    for &s in &config.ts {
                        cells.push(Cell {
                            p: Some(p),
                            t: Some(s),
                            ..cell(n)
                        });
                    }
                }
            }
        }
        CheckKind::PositiveSplit => {
            for &n in &config.dims {
                for &p in &config.ps {
                    for &t in &config.ts {
                        cells.push(Cell {
                            p: Some(p),
                            t: Some(t),
                            ..cell(n)
                        });
                    }
                }
            }
        }
        // One synthetic cell: the certificate is a fixed computation.
        CheckKind::KernelPositivity | CheckKind::Balance => {
            cells.push(cell(config.dims.first().copied().unwrap_or(1)));
        }
        CheckKind::EmbeddingRoundtrip => {
            for &n in &config.dims {
                for &p in &config.ps {
                    for &q in &config.qs {
                        cells.push(Cell {
                            p: Some(p),
                            q: Some(q),
                            ..cell(n)
                        });
                    }
                }
            }
        }
        CheckKind::DiscretizeSandwich => {
            for &n in &config.dims {
                cells.push(cell(n));
            }
        }
    }
    cells
}

/// Triangular part exercised by this trial: alternates the upper part and
/// the strict lower complement. A single-block spectrum has an empty
/// strict complement, so those trials stay on the upper part instead of
/// producing a degenerate zero input.
fn part_for(trial: usize, blocks: &BlockSpectrum) -> TrianglePart {
    if trial % 2 == 0 || blocks.count() < 2 {
        TrianglePart::Upper
    } else {
        TrianglePart::Lower
    }
}

/// Compression of `g` onto one triangular part of the block structure
/// (the lower part via the strict complement, as everywhere else).
fn triangular_sample(
    g: &SquareMatrix,
    blocks: &BlockSpectrum,
    part: TrianglePart,
) -> Result<SquareMatrix> {
    match part {
        TrianglePart::Upper => triangular_project(g, blocks),
        TrianglePart::Lower => triangular_complement(g, blocks),
    }
}

/// Inputs below this Frobenius mass are degenerate (e.g. an empty strict
/// triangle) and their records are skipped rather than divided by zero.
const DEGENERATE_INPUT: f64 = 1e-12;

/// Runs one seeded trial of one grid cell. Infrastructure failures come
/// back as `Err` and abort the run; mathematical failures come back as
/// failing records.
pub fn run_trial(
    config: &ExperimentConfig,
    cell_index: usize,
    cell: &Cell,
    trial: usize,
) -> Result<TrialOutput> {
    let mut rng = trial_rng(config.seed, stream_index(config, cell_index, trial));
    let rng = &mut rng;
    let seed = config.seed;
    let n = cell.dim;
    let mut out = TrialOutput::default();

    match config.check {
        CheckKind::SchurHalf => {
            let p = cell.p.expect("schur-half cell carries p");
            // Alternate a genuinely-clustered spectrum with a spread one;
            // both are full-support (the min symbol is undefined at 0/0).
            let d = match trial % 2 {
                0 => sample::blocky_density(n, 4, 1e3, rng),
                _ => sample::density_with_condition(n, 1e3, rng),
            };
            let x = sample::gaussian_matrix(n, rng);
            let compressed = min_multiplier(&x, d.blocks())?;
            let lhs = schatten_norm(&compressed, p);
            let rhs = 0.5 * schatten_norm(&x, p);
            out.reports.push(CheckReport::new(
                "schur-half",
                digest_matrices(&[d.matrix(), &x]),
                lhs,
                rhs,
                1e-9 * rhs,
                seed,
                vec![p.reciprocal(), n as f64],
            ));
            out.artifacts = vec![("density", d.matrix().clone()), ("x", x)];
        }
        CheckKind::ResolventTriangular => {
            let p = cell.p.expect("resolvent cell carries p");
            let eta = cell.eta.expect("resolvent cell carries eta");
            let d = sample::blocky_density(n, 4, 1e3, rng);
            let g = sample::gaussian_matrix(n, rng);
            let part = part_for(trial, d.blocks());
            let y = triangular_sample(&g, d.blocks(), part)?;
            if y.frobenius_norm() < DEGENERATE_INPUT {
                return Ok(out);
            }
            let mapped = resolvent_weighted(&y, d.blocks(), 1.0, eta)?;
            let lhs = schatten_norm(&mapped, p);
            let rhs = 1.5 * schatten_norm(&y, p);
            out.reports.push(CheckReport::new(
                "resolvent-triangular",
                digest_matrices(&[d.matrix(), &y]),
                lhs,
                rhs,
                1e-9 * rhs,
                seed,
                vec![p.reciprocal(), eta, n as f64],
            ));
            out.artifacts = vec![("density", d.matrix().clone()), ("y", y)];
        }
        CheckKind::QrIdentity => {
            let p = cell.p.expect("qr cell carries p");
            let r = cell.r.expect("qr cell carries r");
            let d = sample::density_with_condition(n, 1e6, rng);
            let x = sample::gaussian_matrix(n, rng);
            let alpha = nclp_core::exponent_gap(r, p)?;
            let w = d.power(alpha);
            let y = &w * &x;
            let z = &x * &w;
            let back = qr_project(&y, &z, &d, p, r)?;
            let rel = (&back - &x).frobenius_norm() / x.frobenius_norm();
            out.reports.push(CheckReport::new(
                "qr-identity:reproduce",
                digest_matrices(&[d.matrix(), &x]),
                rel,
                1e-8,
                0.0,
                seed,
                vec![r.reciprocal(), p.reciprocal(), n as f64],
            ));
            // The kernel direction: Q_r annihilates (y, −y) identically.
            let y2 = sample::gaussian_matrix(n, rng);
            let killed = qr_project(&y2, &(-&y2), &d, p, r)?;
            out.reports.push(CheckReport::new(
                "qr-identity:annihilate",
                digest_matrices(&[d.matrix(), &y2]),
                killed.frobenius_norm(),
                1e-12,
                0.0,
                seed,
                vec![r.reciprocal(), p.reciprocal(), n as f64],
            ));
            out.artifacts = vec![("density", d.matrix().clone()), ("x", x), ("y", y2)];
        }
        CheckKind::Lambda => {
            let q = cell.q.expect("lambda cell carries q");
            let alpha = cell.eta.expect("lambda cell carries the weight power");
            let d = sample::blocky_density(n, 3, 100.0, rng);
            let blocks = d.blocks();
            let part = part_for(trial, blocks);
            let y = triangular_sample(&sample::gaussian_matrix(n, rng), blocks, part)?;
            let z = triangular_sample(&sample::gaussian_matrix(n, rng), blocks, part)?;
            if y.frobenius_norm() < DEGENERATE_INPUT || z.frobenius_norm() < DEGENERATE_INPUT {
                return Ok(out);
            }
            let fixed = nclp_core::lambda_map(&y, &y, blocks, alpha, part)?;
            out.reports.push(CheckReport::new(
                "lambda:identity",
                digest_matrices(&[d.matrix(), &y]),
                (&fixed - &y).frobenius_norm() / y.frobenius_norm(),
                1e-10,
                0.0,
                seed,
                vec![q.reciprocal(), alpha, n as f64],
            ));
            let mixed = nclp_core::lambda_map(&y, &z, blocks, alpha, part)?;
            let lhs = schatten_norm(&mixed, q);
            let rhs = 3.0 * schatten_norm(&y, q).max(schatten_norm(&z, q));
            out.reports.push(CheckReport::new(
                "lambda:bound",
                digest_matrices(&[d.matrix(), &y, &z]),
                lhs,
                rhs,
                1e-9 * rhs,
                seed,
                vec![q.reciprocal(), alpha, n as f64],
            ));
            out.artifacts = vec![("density", d.matrix().clone()), ("y", y), ("z", z)];
        }
        CheckKind::Referee => {
            let q = cell.q.expect("referee cell carries q");
            let (a0, a1) = cell.alphas.expect("referee cell carries its weight pair");
            let d = sample::blocky_density(n, 3, 100.0, rng);
            let blocks = d.blocks();
            let part = TrianglePart::Upper;
            let y = triangular_project(&sample::gaussian_matrix(n, rng), blocks)?;
            let z = triangular_project(&sample::gaussian_matrix(n, rng), blocks)?;
            let (row, col) = referee_components(&y, &z, blocks, a0, a1, part)?;
            let digest = digest_matrices(&[d.matrix(), &y, &z]);
            for alpha_j in [a0, a1] {
                let weigh = |m: &SquareMatrix, side: Side| {
                    triangular_weighted_norm(m, blocks, q, alpha_j, part, side)
                };
                let y_row = weigh(&y, Side::Left)?;
                let z_col = weigh(&z, Side::Right)?;
                // Each component against each one-sided weighted norm of
                // its own input; skip directions whose input vanishes.
                let estimates = [
                    ("referee:row-row", weigh(&row, Side::Left)?, y_row),
                    ("referee:col-col", weigh(&col, Side::Right)?, z_col),
                    ("referee:row-col", weigh(&row, Side::Right)?, y_row),
                    ("referee:col-row", weigh(&col, Side::Left)?, z_col),
                ];
                for (name, lhs, input) in estimates {
                    if input < DEGENERATE_INPUT {
                        continue;
                    }
                    let rhs = 1.5 * input;
                    out.reports.push(CheckReport::new(
                        name,
                        digest.clone(),
                        lhs,
                        rhs,
                        1e-9 * rhs,
                        seed,
                        vec![q.reciprocal(), a0, a1, alpha_j, n as f64],
                    ));
                }
            }
            out.artifacts = vec![("density", d.matrix().clone()), ("y", y), ("z", z)];
        }
        CheckKind::DiffInequality => {
            let p = cell.p.expect("diff cell carries p");
            let a = sample::psd(n, rng);
            let x = sample::psd(n, rng);
            out.reports.push(check_diff_inequality(&a, &x, p, seed)?);
            if p.value() <= 3.0 {
                out.reports.push(check_operator_convexity(&a, &x, p, seed)?);
            }
            out.artifacts = vec![("a", a), ("x", x)];
        }
        CheckKind::DiffIntegral => {
            let p = cell.p.expect("diff cell carries p");
            let a = sample::psd(n, rng);
            let x = sample::psd(n, rng);
            out.reports.push(check_diff_integral(&a, &x, p, seed)?);
            out.artifacts = vec![("a", a), ("x", x)];
        }
        CheckKind::ArakiKosaki => {
            let q = cell.q.expect("araki-kosaki cell carries q");
            let eta = cell.eta.expect("araki-kosaki cell carries eta");
            let a = sample::psd(n, rng);
            let b = sample::psd(n, rng);
            out.reports.push(check_araki_kosaki(&a, &b, eta, q, seed)?);
            out.artifacts = vec![("a", a), ("b", b)];
        }
        CheckKind::Derivative => {
            let p = cell.p.expect("derivative cell carries p");
            let s = cell.t.expect("derivative cell carries the base point");
            // A ridge keeps both central-difference probe points PSD.
            let a = sample::positive_definite(n, 0.1, rng);
            let x = sample::psd(n, rng);
            out.reports.push(check_derivative(&a, &x, p, s, seed)?);
            out.artifacts = vec![("a", a), ("x", x)];
        }
        CheckKind::PositiveSplit => {
            let p = cell.p.expect("positive-split cell carries p");
            let t = cell.t.expect("positive-split cell carries t");
            let x = sample::gaussian_matrix(n, rng);
            // Rotate spectra; the weighted norm is defined for singular
            // densities too (only nonnegative powers of d appear).
            let d = match trial % 3 {
                0 => sample::density_with_condition(n, 100.0, rng),
                1 => sample::blocky_density(n, 3, 100.0, rng),
                _ if n >= 2 => sample::rank_deficient_density(n, n.div_ceil(2), 100.0, rng),
                _ => sample::density_with_condition(n, 100.0, rng),
            };
            out.reports.push(check_positive_split(&x, &d, p, t, seed)?);
            out.artifacts = vec![("x", x), ("density", d.matrix().clone())];
        }
        CheckKind::KernelPositivity => {
            // Deterministic certificate; extra trials re-derive it.
            out.reports.push(kernel_positivity_check(10_000, 256));
        }
        CheckKind::Balance => {
            out.reports.push(balance_trial(config, rng, seed)?);
        }
        CheckKind::EmbeddingRoundtrip => {
            embedding_trial(cell, trial, rng, seed, &mut out)?;
        }
        CheckKind::DiscretizeSandwich => {
            let eps = config.epsilon();
            let d = match trial % 3 {
                0 => sample::density_with_condition(n, 1e3, rng),
                1 => sample::blocky_density(n, 4, 1e3, rng),
                _ => sample::density(n, rng),
            };
            let (snapped, constant) = discretize_with_constant(&d, eps)?;
            // The sandwich as a PSD ordering, certified by an independent
            // eigensolve of both differences (not the shared eigenbasis).
            let upper = &snapped.matrix().scaled_real(constant) - d.matrix();
            let lower = d.matrix() - &snapped.matrix().scaled_real(1.0 / constant);
            let mut defect = 0.0f64;
            for diff in [&upper, &lower] {
                let min = hermitian_eigen(diff)?
                    .eigenvalues
                    .first()
                    .copied()
                    .unwrap_or(0.0);
                defect = defect.max(-min);
            }
            let digest = digest_matrices(&[d.matrix()]);
            out.reports.push(CheckReport::new(
                "discretize-sandwich:order",
                digest.clone(),
                defect,
                1e-12,
                0.0,
                seed,
                vec![eps, n as f64],
            ));
            out.reports.push(CheckReport::new(
                "discretize-sandwich:constant",
                digest,
                constant,
                1.0 + eps,
                1e-12,
                seed,
                vec![eps, n as f64],
            ));
            out.artifacts = vec![("density", d.matrix().clone())];
        }
    }

    if out.reports.iter().all(CheckReport::passed) {
        out.artifacts.clear();
    }
    Ok(out)
}

/// One balance trial: the closed-form minimizer of
/// `t ↦ max{t^{1/p−1/q}·α, t^{1−1/q}·β}` against a brute-force scan of a
/// 1000-point log grid over `t ∈ [1e−6, 1e6]`.
fn balance_trial(
    config: &ExperimentConfig,
    rng: &mut sample::ChaCha8Rng,
    seed: u64,
) -> Result<CheckReport> {
    let g = sample::gaussian_entry(rng);
    let alpha = g.re.exp();
    let beta = g.im.exp();
    let (p, q) = match (config.ps.as_slice(), config.qs.as_slice()) {
        ([p], [q]) => (*p, *q),
        _ => {
            // Sample an admissible pair 2 ≤ q < p < ∞ per trial.
            let h = sample::gaussian_entry(rng);
            let q = 2.0 + h.re.abs();
            let p = q + 0.5 + h.im.abs();
            (PNorm::new(p)?, PNorm::new(q)?)
        }
    };
    let (t_star, value) = balance_parameter(alpha, beta, p, q)?;
    let (pv, qv) = (p.value(), q.value());
    let objective = |t: f64| (t.powf(1.0 / pv - 1.0 / qv) * alpha).max(t.powf(1.0 - 1.0 / qv) * beta);
    let grid_min = (0..1000)
        .map(|i| objective(10f64.powf(-6.0 + 12.0 * i as f64 / 999.0)))
        .fold(f64::INFINITY, f64::min);
    let params = vec![pv, qv, alpha, beta, t_star];
    Ok(CheckReport::new(
        "balance",
        digest_params(&params),
        value,
        grid_min * (1.0 + 1e-6),
        0.0,
        seed,
        params,
    ))
}

/// Strips the dead corner `(1−e)x(1−e)` so `x` satisfies the embedding's
/// corner precondition; for full support this is `x` itself.
fn strip_corner(x: &SquareMatrix, d: &Density) -> SquareMatrix {
    if d.kernel_dim() == 0 {
        return x.clone();
    }
    let e = d.support_projection();
    let ex = &e * x;
    let xe = x * &e;
    let exe = &ex * &e;
    &(&ex + &xe) - &exe
}

fn embedding_trial(
    cell: &Cell,
    trial: usize,
    rng: &mut sample::ChaCha8Rng,
    seed: u64,
    out: &mut TrialOutput,
) -> Result<()> {
    let n = cell.dim;
    let p = cell.p.expect("embedding cell carries p");
    let q = cell.q.expect("embedding cell carries q");
    // Two full-support spectra and (when the dimension allows a kernel)
    // a rank-deficient one exercising the corner decomposition.
    let d = match trial % 3 {
        0 => sample::density_with_condition(n, 1e4, rng),
        1 => sample::blocky_density(n, 3, 1e4, rng),
        _ if n >= 2 => sample::rank_deficient_density(n, n.div_ceil(2), 100.0, rng),
        _ => sample::density_with_condition(n, 1e4, rng),
    };
    let raw = sample::gaussian_matrix(n, rng);
    let x = strip_corner(&raw, &d);
    let u = embed_u(&x, &d, q, p)?;
    let back = reconstruct(&u, &d, q, p)?;
    let rel = (&back - &x).frobenius_norm() / x.frobenius_norm();
    out.reports.push(CheckReport::new(
        "embedding-roundtrip",
        digest_matrices(&[d.matrix(), &x]),
        rel,
        1e-8,
        0.0,
        seed,
        vec![p.value(), q.value(), n as f64, d.kernel_dim() as f64],
    ));
    if d.kernel_dim() > 0 {
        // A dense sample has mass in the forbidden corner, so the
        // embedding must refuse it outright.
        let rejected = match embed_u(&raw, &d, q, p) {
            Err(Error::CornerNotAnnihilated { .. }) => true,
            Err(other) => return Err(other),
            Ok(_) => false,
        };
        out.reports.push(CheckReport::new(
            "embedding-roundtrip:corner-reject",
            digest_matrices(&[d.matrix(), &raw]),
            if rejected { 0.0 } else { 1.0 },
            0.0,
            0.0,
            seed,
            vec![p.value(), q.value(), n as f64, d.kernel_dim() as f64],
        ));
    }
    out.artifacts = vec![("density", d.matrix().clone()), ("x", x)];
    Ok(())
}
