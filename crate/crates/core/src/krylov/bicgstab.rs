use super::{axpy, Breakdown, Context, LoopTimer, Observer, RawOutcome, SolveStatus};
use crate::sparse::{dot, norm2};

pub(super) fn bicgstab(ctx: &Context<'_>, observer: Observer<'_>) -> RawOutcome {
    let n = ctx.b.len();
    let mut x = vec![0.0; n];
    let mut r = ctx.b.to_vec();
    let mut r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut history = Vec::new();
    let timer = LoopTimer::start();

    let (mut rho_prev, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut fresh = true;
    let mut status = SolveStatus::MaxIterations;
    let mut residual = None;
    let mut iterations = 0;

    // On a small recurrence residual, confirm against the true one. Returns
    // true when converged; otherwise the recurrences restart from `b - Ax`.
    let mut confirm = |x: &[f64], r: &mut Vec<f64>, r_hat: &mut Vec<f64>, fresh: &mut bool| {
        let true_res = ctx.true_residual(x, &mut scratch);
        if true_res <= ctx.tol {
            return Some(true_res);
        }
        r.copy_from_slice(&scratch);
        r_hat.copy_from_slice(&scratch);
        *fresh = true;
        None
    };

    while iterations < ctx.max_iterations {
        let rho = dot(&r_hat, &r);
        if rho == 0.0 || !rho.is_finite() {
            status = SolveStatus::Breakdown(Breakdown::Rho);
            break;
        }
        if fresh {
            p.copy_from_slice(&r);
            fresh = false;
        } else {
            let beta = (rho / rho_prev) * (alpha / omega);
            for ((pi, ri), vi) in p.iter_mut().zip(&r).zip(&v) {
                *pi = ri + beta * (*pi - omega * vi);
            }
        }
        ctx.a.spmv_into(&p, &mut v).expect("dimensions checked");
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            status = SolveStatus::Breakdown(Breakdown::ShadowOrthogonal);
            break;
        }
        alpha = rho / rv;
        iterations += 1;
        for ((si, ri), vi) in s.iter_mut().zip(&r).zip(&v) {
            *si = ri - alpha * vi;
        }
        let s_est = norm2(&s) / ctx.bnorm;
        if s_est <= ctx.tol {
            axpy(&mut x, alpha, &p);
            history.push(s_est);
            observer(iterations, &x);
            if let Some(res) = confirm(&x, &mut r, &mut r_hat, &mut fresh) {
                status = SolveStatus::Converged;
                residual = Some(res);
                break;
            }
            continue;
        }
        ctx.a.spmv_into(&s, &mut t).expect("dimensions checked");
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        axpy(&mut x, alpha, &p);
        if omega == 0.0 || !omega.is_finite() {
            history.push(s_est);
            observer(iterations, &x);
            status = SolveStatus::Breakdown(Breakdown::Omega);
            break;
        }
        axpy(&mut x, omega, &s);
        for ((ri, si), ti) in r.iter_mut().zip(&s).zip(&t) {
            *ri = si - omega * ti;
        }
        let est = norm2(&r) / ctx.bnorm;
        history.push(est);
        observer(iterations, &x);
        if est <= ctx.tol {
            if let Some(res) = confirm(&x, &mut r, &mut r_hat, &mut fresh) {
                status = SolveStatus::Converged;
                residual = Some(res);
                break;
            }
        }
        rho_prev = rho;
    }
    let elapsed_ns = timer.ns();
    let residual = residual.unwrap_or_else(|| ctx.true_residual(&x, &mut vec![0.0; n]));
    RawOutcome {
        x,
        iterations,
        status,
        residual,
        history,
        elapsed_ns,
    }
}
