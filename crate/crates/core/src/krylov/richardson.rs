use super::{
    axpy, solve, Context, LoopTimer, Observer, RawOutcome, SolveOutcome, SolveStatus, SolverError,
    SolverKind, SolverSpec,
};
use crate::sparse::SparseMatrix;

/// `x_{k+1} = x_k + ω (b - A x_k)` from `x₀ = 0`.
pub fn richardson(
    a: &SparseMatrix,
    b: &[f64],
    omega: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<SolveOutcome, SolverError> {
    let spec = SolverSpec {
        kind: SolverKind::Richardson { omega },
        tol,
        max_iterations,
    };
    solve(a, b, &spec)
}

/// Growth of the relative residual (initially 1) that counts as divergence.
const DIVERGENCE_FACTOR: f64 = 10.0;

pub(super) fn iterate(ctx: &Context<'_>, omega: f64, observer: Observer<'_>) -> RawOutcome {
    let n = ctx.b.len();
    let mut x = vec![0.0; n];
    let mut r = ctx.b.to_vec();
    let mut history = Vec::new();
    let timer = LoopTimer::start();

    let mut status = SolveStatus::MaxIterations;
    let mut residual = 1.0;
    let mut iterations = 0;
    while iterations < ctx.max_iterations {
        axpy(&mut x, omega, &r);
        residual = ctx.true_residual(&x, &mut r);
        iterations += 1;
        history.push(residual);
        observer(iterations, &x);
        if residual <= ctx.tol {
            status = SolveStatus::Converged;
            break;
        }
        if !(residual <= DIVERGENCE_FACTOR) {
            status = SolveStatus::Diverged;
            break;
        }
    }
    RawOutcome {
        x,
        iterations,
        status,
        residual,
        history,
        elapsed_ns: timer.ns(),
    }
}
