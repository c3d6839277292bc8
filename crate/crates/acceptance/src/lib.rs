//! Oracles for the acceptance suite, written without the library under test.
//!
//! Everything here works on dense row-major `Vec<Vec<f64>>` so that no code
//! path is shared with the sparse kernels being checked.

#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m[i][k].abs() > m[p][k].abs() {
                p = i;
            }
        }
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f != 0.0 {
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    x
}

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum())
        .collect()
}

/// `‖x - y‖₂ / ‖y‖₂`.
pub fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum();
    let den: f64 = y.iter().map(|v| v * v).sum();
    (num / den).sqrt()
}

/// Quantile by 1-based rank `h = 1 + (n - 1) p`, interpolating between the
/// neighbouring order statistics.
pub fn percentile_oracle(sample: &[f64], p: f64) -> f64 {
    let mut v = sample.to_vec();
    // Insertion sort: deliberately not the library's sort.
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
    let h = 1.0 + (v.len() as f64 - 1.0) * p;
    let k = h.floor() as usize;
    if k >= v.len() {
        return v[v.len() - 1];
    }
    v[k - 1] + (h - k as f64) * (v[k] - v[k - 1])
}

/// Random dense-stored sparse matrix with entries in [-5, 5] and roughly
/// `density · n²` nonzeros; every row has at least one entry.
pub fn random_sparse_dense(n: usize, density: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for v in row.iter_mut() {
            if rng.random_bool(density) {
                *v = rng.random_range(-5.0..5.0);
            }
        }
        if row.iter().all(|v| *v == 0.0) {
            row[rng.random_range(0..n)] = rng.random_range(0.5..5.0) * if i % 2 == 0 { 1.0 } else { -1.0 };
        }
    }
    a
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_on_known_system() {
        let x = lu_solve(&[vec![4.0, 1.0], vec![1.0, 3.0]], &[1.0, 2.0]);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15 && (x[1] - 7.0 / 11.0).abs() < 1e-15);
        let x = lu_solve(&[vec![0.0, 2.0], vec![3.0, 0.0]], &[4.0, 3.0]);
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn percentile_oracle_hand_values() {
        let v: Vec<f64> = (1..=10).rev().map(f64::from).collect();
        assert_eq!(percentile_oracle(&v, 0.5), 5.5);
        assert_eq!(percentile_oracle(&v, 0.25), 3.25);
        assert_eq!(percentile_oracle(&v, 0.75), 7.75);
        assert_eq!(percentile_oracle(&v, 1.0), 10.0);
        assert_eq!(percentile_oracle(&[42.0], 0.25), 42.0);
    }
}
