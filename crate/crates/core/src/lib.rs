//! Emulator for a laser processing unit that solves `Ax = b` by letting
//! coupled lasers settle into a steady phase pattern, together with the
//! sparse-matrix substrate, digital Krylov baselines and a benchmark harness.
//!
//! The usual flow is [`matrix_market`] → [`encoding::encode`] →
//! [`dynamics::run`], with [`krylov::solve`] as the digital comparison and
//! [`bench`] driving repeated measurements.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod dynamics;
pub mod encoding;
pub mod generate;
pub mod krylov;
pub mod matrix_market;
pub mod sparse;

#[cfg(test)]
mod test_support;

pub use encoding::{decode, encode, EncodingConfig, LpuProblem, Sign, SystemMode};
pub use matrix_market::{parse_matrix_market, read_matrix_market_path, MatrixMetadata, Symmetry};
pub use sparse::{relative_residual, MatrixError, SparseMatrix};
