//! Digital baselines: CG, restarted GMRES, BiCGSTAB and Richardson.
//!
//! Every solver starts from `x₀ = 0`, uses no preconditioner and declares
//! convergence only after recomputing the true residual `‖b - Ax‖ / ‖b‖`.

mod bicgstab;
mod cg;
mod gmres;
mod richardson;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use web_time::Instant;

pub use richardson::richardson;

use crate::sparse::{norm2, MatrixError, SparseMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("invalid solver spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverKind {
    Cg,
    Gmres { restart: usize },
    Bicgstab,
    Richardson { omega: f64 },
}

impl SolverKind {
    pub fn label(&self) -> String {
        match self {
            SolverKind::Cg => "cg".into(),
            SolverKind::Gmres { restart } => format!("gmres({restart})"),
            SolverKind::Bicgstab => "bicgstab".into(),
            SolverKind::Richardson { omega } => format!("richardson({omega})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(flatten)]
    pub kind: SolverKind,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_tol() -> f64 {
    1e-5
}

fn default_max_iterations() -> usize {
    10_000
}

impl SolverSpec {
    pub fn new(kind: SolverKind) -> Self {
        Self {
            kind,
            tol: default_tol(),
            max_iterations: default_max_iterations(),
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0) {
            return Err(SolverError::Spec(format!("tol must be positive, got {}", self.tol)));
        }
        match self.kind {
            SolverKind::Gmres { restart: 0 } => {
                Err(SolverError::Spec("GMRES restart must be at least 1".into()))
            }
            SolverKind::Richardson { omega } if omega == 0.0 || !omega.is_finite() => {
                Err(SolverError::Spec(format!("Richardson omega must be non-zero, got {omega}")))
            }
            _ => Ok(()),
        }
    }
}

/// Why a solve stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Breakdown {
    /// `pᵀAp ≤ 0` in CG: the matrix is not positive definite along `p`.
    IndefinitePivot,
    /// `ρ = r̂ᵀr = 0` in BiCGSTAB.
    Rho,
    /// `r̂ᵀv = 0` in BiCGSTAB.
    ShadowOrthogonal,
    /// `ω = 0` in BiCGSTAB.
    Omega,
    /// A full GMRES cycle made no progress.
    Stagnation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Breakdown(Breakdown),
    /// Residual grew 10× above its initial value (Richardson).
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub status: SolveStatus,
    pub final_residual: f64,
    /// Wall-clock duration of the iteration loop only; allocation is excluded.
    pub apply_time_ns: u64,
    /// Residual estimate after each iteration (recurrence or Arnoldi).
    pub residual_history: Vec<f64>,
}

/// Per-iteration hook; receives the iteration number and current iterate.
/// GMRES reports only at the end of each restart cycle, when `x` is formed.
pub type Observer<'a> = &'a mut dyn FnMut(usize, &[f64]);

pub fn solve(a: &SparseMatrix, b: &[f64], spec: &SolverSpec) -> Result<SolveOutcome, SolverError> {
    solve_observed(a, b, spec, &mut |_, _| {})
}

pub fn solve_observed(
    a: &SparseMatrix,
    b: &[f64],
    spec: &SolverSpec,
    observer: Observer<'_>,
) -> Result<SolveOutcome, SolverError> {
    spec.validate()?;
    let n = a.ensure_square()?;
    if b.len() != n {
        return Err(MatrixError::DimensionMismatch {
            expected: n,
            got: b.len(),
        }
        .into());
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Err(MatrixError::ZeroRhs.into());
    }
    let ctx = Context {
        a,
        b,
        bnorm,
        tol: spec.tol,
        max_iterations: spec.max_iterations,
    };
    let raw = match spec.kind {
        SolverKind::Cg => cg::cg(&ctx, observer),
        SolverKind::Gmres { restart } => gmres::gmres(&ctx, restart, observer),
        SolverKind::Bicgstab => bicgstab::bicgstab(&ctx, observer),
        SolverKind::Richardson { omega } => richardson::iterate(&ctx, omega, observer),
    };
    Ok(SolveOutcome {
        converged: raw.status == SolveStatus::Converged,
        x: raw.x,
        iterations: raw.iterations,
        status: raw.status,
        final_residual: raw.residual,
        apply_time_ns: raw.elapsed_ns,
        residual_history: raw.history,
    })
}

pub(crate) struct Context<'a> {
    a: &'a SparseMatrix,
    b: &'a [f64],
    bnorm: f64,
    tol: f64,
    max_iterations: usize,
}

impl Context<'_> {
    /// `r = b - Ax` and `‖r‖ / ‖b‖`.
    fn true_residual(&self, x: &[f64], r: &mut [f64]) -> f64 {
        self.a.spmv_into(x, r).expect("dimensions checked");
        for (ri, bi) in r.iter_mut().zip(self.b) {
            *ri = bi - *ri;
        }
        norm2(r) / self.bnorm
    }
}

pub(crate) struct RawOutcome {
    x: Vec<f64>,
    iterations: usize,
    status: SolveStatus,
    residual: f64,
    history: Vec<f64>,
    elapsed_ns: u64,
}

/// Started after work vectors are allocated so setup stays out of apply time.
pub(crate) struct LoopTimer(Instant);

impl LoopTimer {
    fn start() -> Self {
        Self(Instant::now())
    }

    fn ns(&self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests;
