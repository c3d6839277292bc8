//! Seeded right-hand sides and synthetic test systems.
//!
//! All randomness comes from `ChaCha20Rng::seed_from_u64`, whose output stream
//! is fixed by the ChaCha20 definition and identical on every platform.
//! Normal deviates use `rand_distr::StandardNormal` (ziggurat), which is
//! value-stable within its major version.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::sparse::{MatrixError, SparseMatrix};

/// i.i.d. standard-normal vector of length `n`.
pub fn random_rhs(n: usize, seed: u64) -> Result<Vec<f64>, MatrixError> {
    if n == 0 {
        return Err(MatrixError::EmptyVector);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.sample(StandardNormal)).collect())
}

/// Symmetric multi-banded matrix with diagonals at offsets `±1..=bandwidth`.
///
/// Off-diagonal entries are drawn from `[-1, -0.1]` and each diagonal entry is
/// the row's absolute off-diagonal sum plus one, so the matrix is strictly
/// diagonally dominant and SPD with smallest eigenvalue at least 1.
pub fn banded_spd(n: usize, bandwidth: usize, seed: u64) -> Result<SparseMatrix, MatrixError> {
    if n == 0 {
        return Err(MatrixError::EmptyVector);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut off = vec![vec![0.0f64; bandwidth + 1]; n];
    for row in off.iter_mut() {
        for v in row.iter_mut().skip(1) {
            *v = -rng.random_range(0.1..=1.0);
        }
    }
    let mut triplets = Vec::with_capacity(n * (2 * bandwidth + 1));
    for i in 0..n {
        let mut abs_sum = 0.0;
        for d in 1..=bandwidth {
            if i + d < n {
                let v = off[i][d];
                triplets.push((i, i + d, v));
                triplets.push((i + d, i, v));
                abs_sum += v.abs();
            }
            if i >= d {
                abs_sum += off[i - d][d].abs();
            }
        }
        triplets.push((i, i, abs_sum + 1.0));
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Non-symmetric multi-banded matrix (upwind-style skew in the bands).
/// Strictly diagonally dominant with positive diagonal.
pub fn banded_nonsymmetric(
    n: usize,
    bandwidth: usize,
    seed: u64,
) -> Result<SparseMatrix, MatrixError> {
    if n == 0 {
        return Err(MatrixError::EmptyVector);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut triplets = Vec::with_capacity(n * (2 * bandwidth + 1));
    for i in 0..n {
        let mut abs_sum = 0.0;
        for d in 1..=bandwidth {
            if i + d < n {
                let v: f64 = -rng.random_range(0.05..=0.5);
                triplets.push((i, i + d, v));
                abs_sum += v.abs();
            }
            if i >= d {
                let v: f64 = -rng.random_range(0.3..=1.0);
                triplets.push((i, i - d, v));
                abs_sum += v.abs();
            }
        }
        triplets.push((i, i, abs_sum + 1.0));
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Random sparse symmetric matrix made strictly diagonally dominant.
/// `density` is the probability that an off-diagonal pair is present.
pub fn random_diag_dominant_spd(
    n: usize,
    density: f64,
    margin: f64,
    seed: u64,
) -> Result<SparseMatrix, MatrixError> {
    if n == 0 {
        return Err(MatrixError::EmptyVector);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut triplets = Vec::new();
    let mut abs_sums = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            if rng.random_bool(density) {
                let v: f64 = rng.random_range(-1.0..1.0);
                triplets.push((i, j, v));
                triplets.push((j, i, v));
                abs_sums[i] += v.abs();
                abs_sums[j] += v.abs();
            }
        }
    }
    for (i, s) in abs_sums.iter().enumerate() {
        triplets.push((i, i, s + margin));
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}
