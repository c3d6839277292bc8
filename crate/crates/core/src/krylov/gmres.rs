use super::{Breakdown, Context, LoopTimer, Observer, RawOutcome, SolveStatus};
use crate::sparse::{dot, norm2};

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
/// Each Arnoldi step counts as one iteration.
pub(super) fn gmres(ctx: &Context<'_>, restart: usize, observer: Observer<'_>) -> RawOutcome {
    let n = ctx.b.len();
    let m = restart.min(n.max(1));
    let mut x = vec![0.0; n];
    let mut r = ctx.b.to_vec();
    let mut w = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = vec![vec![0.0; n]; m + 1];
    // Column-major Hessenberg: h[j] holds column j, length j + 2.
    let mut h: Vec<Vec<f64>> = (0..m).map(|j| vec![0.0; j + 2]).collect();
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut y = vec![0.0; m];
    let mut history = Vec::new();
    let timer = LoopTimer::start();

    let mut beta = norm2(&r);
    let mut iterations = 0;
    let status;
    let residual;
    loop {
        for (i, bi) in basis[0].iter_mut().enumerate() {
            *bi = r[i] / beta;
        }
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;

        let mut k = 0;
        let mut singular = false;
        while k < m && iterations < ctx.max_iterations {
            let j = k;
            ctx.a.spmv_into(&basis[j], &mut w).expect("dimensions checked");
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                h[j][i] = hij;
                for (wl, vl) in w.iter_mut().zip(&basis[i]) {
                    *wl -= hij * vl;
                }
            }
            let sub = norm2(&w);
            h[j][j + 1] = sub;
            for i in 0..j {
                let (a, b) = (h[j][i], h[j][i + 1]);
                h[j][i] = cs[i] * a + sn[i] * b;
                h[j][i + 1] = -sn[i] * a + cs[i] * b;
            }
            let (a, b) = (h[j][j], h[j][j + 1]);
            let rho = a.hypot(b);
            iterations += 1;
            k += 1;
            if rho == 0.0 {
                singular = true;
                k -= 1;
                break;
            }
            cs[j] = a / rho;
            sn[j] = b / rho;
            h[j][j] = rho;
            h[j][j + 1] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            let estimate = g[j + 1].abs() / ctx.bnorm;
            history.push(estimate);
            if sub == 0.0 || estimate <= ctx.tol {
                break;
            }
            for (vl, wl) in basis[j + 1].iter_mut().zip(&w) {
                *vl = wl / sub;
            }
        }

        // Back substitution on the k×k triangle, then x += V y.
        for i in (0..k).rev() {
            let mut acc = g[i];
            for l in i + 1..k {
                acc -= h[l][i] * y[l];
            }
            y[i] = acc / h[i][i];
        }
        for (l, yl) in y.iter().enumerate().take(k) {
            for (xi, vi) in x.iter_mut().zip(&basis[l]) {
                *xi += yl * vi;
            }
        }
        observer(iterations, &x);

        let true_res = ctx.true_residual(&x, &mut r);
        if true_res <= ctx.tol {
            status = SolveStatus::Converged;
            residual = true_res;
            break;
        }
        if iterations >= ctx.max_iterations {
            status = SolveStatus::MaxIterations;
            residual = true_res;
            break;
        }
        let new_beta = true_res * ctx.bnorm;
        if singular || k == 0 || !(new_beta < beta) {
            status = SolveStatus::Breakdown(Breakdown::Stagnation);
            residual = true_res;
            break;
        }
        beta = new_beta;
    }
    let elapsed_ns = timer.ns();
    RawOutcome {
        x,
        iterations,
        status,
        residual,
        history,
        elapsed_ns,
    }
}
