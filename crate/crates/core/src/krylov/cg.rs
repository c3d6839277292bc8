use super::{axpy, Breakdown, Context, LoopTimer, Observer, RawOutcome, SolveStatus};
use crate::sparse::dot;

pub(super) fn cg(ctx: &Context<'_>, observer: Observer<'_>) -> RawOutcome {
    let n = ctx.b.len();
    let mut x = vec![0.0; n];
    let mut r = ctx.b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut history = Vec::new();
    let mut rr = dot(&r, &r);
    let timer = LoopTimer::start();

    let mut status = SolveStatus::MaxIterations;
    let mut residual = None;
    let mut iterations = 0;
    while iterations < ctx.max_iterations {
        ctx.a.spmv_into(&p, &mut ap).expect("dimensions checked");
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            status = SolveStatus::Breakdown(Breakdown::IndefinitePivot);
            break;
        }
        let alpha = rr / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        iterations += 1;
        let mut rr_new = dot(&r, &r);
        history.push(rr_new.sqrt() / ctx.bnorm);
        observer(iterations, &x);

        if rr_new.sqrt() / ctx.bnorm <= ctx.tol {
            let true_res = ctx.true_residual(&x, &mut scratch);
            if true_res <= ctx.tol {
                status = SolveStatus::Converged;
                residual = Some(true_res);
                break;
            }
            // Recurrence drifted from the true residual: replace it and
            // restart the search direction.
            r.copy_from_slice(&scratch);
            rr_new = dot(&r, &r);
            p.copy_from_slice(&r);
            rr = rr_new;
            continue;
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    let elapsed_ns = timer.ns();
    let residual = residual.unwrap_or_else(|| ctx.true_residual(&x, &mut scratch));
    RawOutcome {
        x,
        iterations,
        status,
        residual,
        history,
        elapsed_ns,
    }
}
