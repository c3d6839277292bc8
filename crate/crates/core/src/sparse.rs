//! Compressed sparse row storage and the dense-free kernels the solvers need.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("row_starts must have length nrows + 1 = {expected}, got {got}")]
    RowStartsLength { expected: usize, got: usize },
    #[error("row_starts must begin at 0 and end at nnz = {nnz}")]
    RowStartsBounds { nnz: usize },
    #[error("row_starts decreases at row {row}")]
    RowStartsDecreasing { row: usize },
    #[error("col_indices and values lengths differ ({cols} vs {vals})")]
    LengthMismatch { cols: usize, vals: usize },
    #[error("column index {col} out of bounds in row {row} (ncols = {ncols})")]
    ColumnOutOfBounds { row: usize, col: usize, ncols: usize },
    #[error("row {row} has unsorted or duplicate column {col}")]
    UnsortedRow { row: usize, col: usize },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("right-hand side has zero norm")]
    ZeroRhs,
    #[error("vector length must be at least 1")]
    EmptyVector,
}

/// Real square-or-rectangular matrix in CSR form.
///
/// Rows are sorted by column with no duplicates; every constructor checks this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_starts: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_starts: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, MatrixError> {
        if row_starts.len() != nrows + 1 {
            return Err(MatrixError::RowStartsLength {
                expected: nrows + 1,
                got: row_starts.len(),
            });
        }
        if col_indices.len() != values.len() {
            return Err(MatrixError::LengthMismatch {
                cols: col_indices.len(),
                vals: values.len(),
            });
        }
        let nnz = values.len();
        if row_starts[0] != 0 || row_starts[nrows] != nnz {
            return Err(MatrixError::RowStartsBounds { nnz });
        }
        for row in 0..nrows {
            let (start, end) = (row_starts[row], row_starts[row + 1]);
            if end < start {
                return Err(MatrixError::RowStartsDecreasing { row });
            }
            let mut prev: Option<usize> = None;
            for k in start..end {
                let col = col_indices[k];
                if col >= ncols {
                    return Err(MatrixError::ColumnOutOfBounds { row, col, ncols });
                }
                if prev.is_some_and(|p| p >= col) {
                    return Err(MatrixError::UnsortedRow { row, col });
                }
                if !values[k].is_finite() {
                    return Err(MatrixError::NonFinite { row, col });
                }
                prev = Some(col);
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_starts,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets in any order.
    /// Duplicate coordinates are rejected.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, MatrixError> {
        let mut counts = vec![0usize; nrows + 1];
        for &(row, col, value) in triplets {
            if row >= nrows {
                return Err(MatrixError::DimensionMismatch {
                    expected: nrows,
                    got: row + 1,
                });
            }
            if col >= ncols {
                return Err(MatrixError::ColumnOutOfBounds { row, col, ncols });
            }
            if !value.is_finite() {
                return Err(MatrixError::NonFinite { row, col });
            }
            counts[row + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let row_starts = counts.clone();
        let mut next = counts;
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(row, col, value) in triplets {
            entries[next[row]] = (col, value);
            next[row] += 1;
        }
        for row in 0..nrows {
            let slot = &mut entries[row_starts[row]..row_starts[row + 1]];
            slot.sort_by_key(|&(col, _)| col);
            if let Some(w) = slot.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(MatrixError::DuplicateEntry { row, col: w[0].0 });
            }
        }
        let (col_indices, values) = entries.into_iter().unzip();
        Self::from_csr(nrows, ncols, row_starts, col_indices, values)
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(MatrixError::DimensionMismatch {
                    expected: ncols,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_starts: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_starts(&self) -> &[usize] {
        &self.row_starts
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn ensure_square(&self) -> Result<usize, MatrixError> {
        if self.is_square() {
            Ok(self.nrows)
        } else {
            Err(MatrixError::NotSquare {
                nrows: self.nrows,
                ncols: self.ncols,
            })
        }
    }

    /// Column indices and values of one row.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_starts[i]..self.row_starts[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    /// Stored value at `(i, j)`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            dense[i][j] = v;
        }
        dense
    }

    /// `y = A x`, summing each row in stored column order.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, MatrixError> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<(), MatrixError> {
        if x.len() != self.ncols {
            return Err(MatrixError::DimensionMismatch {
                expected: self.ncols,
                got: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(MatrixError::DimensionMismatch {
                expected: self.nrows,
                got: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_starts[i]..self.row_starts[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// Row sums in stored column order. Matches `spmv(ones)` bit for bit.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| {
                let mut acc = 0.0;
                for &v in self.row(i).1 {
                    acc += v * 1.0;
                }
                acc
            })
            .collect()
    }

    /// Largest row 1-norm, i.e. the induced infinity norm.
    pub fn max_row_abs_sum(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_starts = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // Walking rows in order keeps each output row sorted.
        for (i, j, v) in self.iter() {
            let slot = next[j];
            col_indices[slot] = i;
            values[slot] = v;
            next[j] += 1;
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_starts,
            col_indices,
            values,
        }
    }

    /// Sparse product `self * rhs` (Gustavson, dense accumulator per row).
    pub fn matmul(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, MatrixError> {
        if self.ncols != rhs.nrows {
            return Err(MatrixError::DimensionMismatch {
                expected: self.ncols,
                got: rhs.nrows,
            });
        }
        let mut acc = vec![0.0; rhs.ncols];
        let mut marker = vec![usize::MAX; rhs.ncols];
        let mut row_starts = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_starts.push(0);
        let mut touched = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (cols, vals) = self.row(i);
            for (&k, &aik) in cols.iter().zip(vals) {
                let (rcols, rvals) = rhs.row(k);
                for (&j, &bkj) in rcols.iter().zip(rvals) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += aik * bkj;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_indices.push(j);
                values.push(acc[j]);
            }
            row_starts.push(col_indices.len());
        }
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: rhs.ncols,
            row_starts,
            col_indices,
            values,
        })
    }

    /// Returns a copy with every stored value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> SparseMatrix {
        self.map_values(|v| v * factor)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SparseMatrix {
        SparseMatrix {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.iter().all(|(i, j, v)| self.get(j, i) == v)
    }

    /// Number of stored diagonals, i.e. distinct `j - i` offsets.
    pub fn band_offsets(&self) -> Vec<isize> {
        let mut offsets: Vec<isize> = self
            .iter()
            .map(|(i, j, _)| j as isize - i as isize)
            .collect();
        offsets.sort_unstable();
        offsets.dedup();
        offsets
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖Ax − b‖₂ / ‖b‖₂`, the convergence measure shared by every solver.
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Result<f64, MatrixError> {
    if b.len() != a.nrows() {
        return Err(MatrixError::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Err(MatrixError::ZeroRhs);
    }
    let ax = a.spmv(x)?;
    let r: f64 = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    Ok(r / bnorm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_mul(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| {
                let mut acc = 0.0;
                for (v, xi) in row.iter().zip(x) {
                    acc += v * xi;
                }
                acc
            })
            .collect()
    }

    #[test]
    fn identity_spmv() {
        let y = SparseMatrix::identity(2).spmv(&[3.0, -2.0]).unwrap();
        assert_eq!(y, vec![3.0, -2.0]);
    }

    #[test]
    fn laplacian_spmv_on_ones() {
        let a = SparseMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(a.spmv(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = SparseMatrix::identity(3);
        assert!(matches!(
            a.spmv(&[1.0]),
            Err(MatrixError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn residual_cases() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let b = [2.0, 4.0];
        assert_eq!(relative_residual(&a, &[1.0, 1.0], &b).unwrap(), 0.0);
        assert_eq!(relative_residual(&a, &[0.0, 0.0], &b).unwrap(), 1.0);
        // Ax - b = [-1, -2], ‖·‖ = √5, ‖b‖ = √20.
        let r = relative_residual(&a, &[0.5, 0.5], &b).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
        assert_eq!(
            relative_residual(&a, &[1.0, 1.0], &[0.0, 0.0]),
            Err(MatrixError::ZeroRhs)
        );
    }

    #[test]
    fn transpose_cases() {
        let i3 = SparseMatrix::identity(3);
        assert_eq!(i3.transpose(), i3);
        let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let t = a.transpose();
        assert_eq!(t.nnz(), 1);
        assert_eq!(t.get(1, 0), 1.0);
        assert_eq!(t.get(0, 1), 0.0);
    }

    #[test]
    fn duplicate_triplet_rejected() {
        let err = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap_err();
        assert_eq!(err, MatrixError::DuplicateEntry { row: 0, col: 0 });
    }

    #[test]
    fn invalid_csr_rejected() {
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
    }

    #[test]
    fn row_sums_match_spmv_of_ones_bitwise() {
        let a = SparseMatrix::from_dense(&[
            vec![0.1, 0.7, -0.3],
            vec![1e-17, 1.0, -1.0],
            vec![0.0, 0.0, 0.2],
        ])
        .unwrap();
        assert_eq!(a.row_sums(), a.spmv(&[1.0; 3]).unwrap());
    }

    fn small_matrix() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
        (1usize..=20).prop_flat_map(|n| {
            let cell = prop_oneof![3 => Just(0.0), 2 => -5.0f64..5.0];
            (Just(n), proptest::collection::vec(proptest::collection::vec(cell, n), n))
        })
    }

    proptest! {
        #[test]
        fn spmv_matches_dense_oracle((n, dense) in small_matrix(), seed in 0u64..1000) {
            let a = SparseMatrix::from_dense(&dense).unwrap();
            let x: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed) % 97) as f64 / 13.0 - 3.0).collect();
            let y = a.spmv(&x).unwrap();
            let expected = dense_mul(&dense, &x);
            for (p, q) in y.iter().zip(&expected) {
                prop_assert!((p - q).abs() <= 1e-13 * q.abs().max(1.0));
            }
        }

        #[test]
        fn transpose_is_involution((_n, dense) in small_matrix()) {
            let a = SparseMatrix::from_dense(&dense).unwrap();
            let t = a.transpose();
            prop_assert_eq!(t.transpose(), a.clone());
            for (i, j, v) in a.iter() {
                prop_assert_eq!(t.get(j, i), v);
            }
        }

        #[test]
        fn gram_matrix_is_bitwise_symmetric((_n, dense) in small_matrix()) {
            let a = SparseMatrix::from_dense(&dense).unwrap();
            let g = a.transpose().matmul(&a).unwrap();
            prop_assert!(g.is_symmetric());
        }
    }
}
