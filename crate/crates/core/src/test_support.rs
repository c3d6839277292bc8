//! Dense oracles shared by unit tests.

use crate::sparse::SparseMatrix;

/// Gaussian elimination with partial pivoting on the dense copy of `a`.
#[allow(clippy::needless_range_loop)]
pub(crate) fn lu_solve(a: &SparseMatrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m = a.to_dense();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    x
}

pub(crate) fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    num / den
}
