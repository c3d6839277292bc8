use proptest::prelude::*;

use super::*;
use crate::generate::{banded_nonsymmetric, random_diag_dominant_spd, random_rhs};
use crate::sparse::relative_residual;
use crate::test_support::{lu_solve, rel_err};

fn all_kinds() -> Vec<SolverKind> {
    vec![
        SolverKind::Cg,
        SolverKind::Gmres { restart: 30 },
        SolverKind::Bicgstab,
        SolverKind::Richardson { omega: 1.0 },
    ]
}

#[test]
fn identity_converges_in_one_iteration() {
    let a = SparseMatrix::identity(4);
    let b = vec![1.0, -2.0, 0.5, 3.0];
    for kind in all_kinds() {
        let out = solve(&a, &b, &SolverSpec::new(kind)).unwrap();
        assert!(out.converged, "{kind:?}");
        assert_eq!(out.iterations, 1, "{kind:?}");
        assert!(rel_err(&out.x, &b) < 1e-15, "{kind:?}");
    }
}

#[test]
fn cg_two_by_two() {
    let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
    let out = solve(&a, &[1.0, 2.0], &SolverSpec::new(SolverKind::Cg)).unwrap();
    assert!(out.converged);
    assert!(out.iterations <= 2);
    assert!((out.x[0] - 1.0 / 11.0).abs() < 1e-6);
    assert!((out.x[1] - 7.0 / 11.0).abs() < 1e-6);
}

#[test]
fn richardson_contracts_when_spectral_radius_below_one() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
    let b = [1.0, 1.0];
    let out = richardson(&a, &b, 0.5, 1e-10, 1000).unwrap();
    assert!(out.converged);
    assert!((out.x[0] - 1.0).abs() < 1e-9 && (out.x[1] - 1.0 / 3.0).abs() < 1e-9);
    // Error in each eigencomponent shrinks by exactly 0.5 per step.
    for w in out.residual_history.windows(2) {
        assert!((w[1] / w[0] - 0.5).abs() < 1e-9);
    }
}

#[test]
fn richardson_divergence_is_reported() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
    let out = richardson(&a, &[1.0, 1.0], 1.0, 1e-10, 1000).unwrap();
    assert!(!out.converged);
    assert_eq!(out.status, SolveStatus::Diverged);
    assert!(out.final_residual > 10.0);
    assert!(out.iterations < 10);
}

#[test]
fn richardson_matches_direct_recurrence() {
    let a = random_diag_dominant_spd(12, 0.4, 2.0, 5).unwrap();
    let b = random_rhs(12, 6).unwrap();
    let omega = 0.8 / a.max_row_abs_sum();
    let out = richardson(&a, &b, omega, 1e-30, 25).unwrap();
    let dense = a.to_dense();
    let mut x = vec![0.0; 12];
    for _ in 0..25 {
        let r: Vec<f64> = (0..12)
            .map(|i| b[i] - (0..12).map(|j| dense[i][j] * x[j]).sum::<f64>())
            .collect();
        for i in 0..12 {
            x[i] += omega * r[i];
        }
    }
    assert_eq!(out.status, SolveStatus::MaxIterations);
    assert!(rel_err(&out.x, &x) < 1e-13);
}

#[test]
fn cg_error_a_norm_is_non_increasing() {
    for seed in 0..5 {
        let n = 30;
        let a = random_diag_dominant_spd(n, 0.3, 0.5, seed).unwrap();
        let b = random_rhs(n, seed + 50).unwrap();
        let exact = lu_solve(&a, &b);
        let a_norm = |x: &[f64]| {
            let e: Vec<f64> = x.iter().zip(&exact).map(|(u, v)| u - v).collect();
            crate::sparse::dot(&e, &a.spmv(&e).unwrap())
        };
        let mut norms = vec![a_norm(&vec![0.0; n])];
        let spec = SolverSpec::new(SolverKind::Cg).with_tol(1e-12);
        let out = solve_observed(&a, &b, &spec, &mut |_, x| norms.push(a_norm(x))).unwrap();
        assert!(out.converged);
        assert!(out.iterations <= n);
        for w in norms.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-28, "{w:?}");
        }
    }
}

#[test]
fn gmres_residuals_non_increasing_within_cycle() {
    let a = banded_nonsymmetric(60, 3, 2).unwrap();
    let b = random_rhs(60, 3).unwrap();
    let restart = 7;
    let spec = SolverSpec::new(SolverKind::Gmres { restart }).with_tol(1e-10);
    let out = solve(&a, &b, &spec).unwrap();
    assert!(out.converged);
    assert!(out.iterations > restart, "needs more than one cycle");
    for cycle in out.residual_history.chunks(restart) {
        for w in cycle.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}

#[test]
fn solves_are_deterministic() {
    let a = banded_nonsymmetric(80, 2, 11).unwrap();
    let b = random_rhs(80, 12).unwrap();
    for kind in [SolverKind::Gmres { restart: 10 }, SolverKind::Bicgstab] {
        let spec = SolverSpec::new(kind);
        let first = solve(&a, &b, &spec).unwrap();
        let second = solve(&a, &b, &spec).unwrap();
        assert_eq!(first.iterations, second.iterations);
        assert_eq!(first.x, second.x);
        assert_eq!(first.residual_history, second.residual_history);
    }
}

#[test]
fn cg_reports_indefinite_pivot() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
    let out = solve(&a, &[0.0, 1.0], &SolverSpec::new(SolverKind::Cg)).unwrap();
    assert!(!out.converged);
    assert_eq!(out.status, SolveStatus::Breakdown(Breakdown::IndefinitePivot));
}

#[test]
fn bicgstab_reports_shadow_breakdown() {
    // r̂ = b = e₀ and v = A e₀ = e₁, so r̂ᵀv = 0 on the first step.
    let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let out = solve(&a, &[1.0, 0.0], &SolverSpec::new(SolverKind::Bicgstab)).unwrap();
    assert_eq!(out.status, SolveStatus::Breakdown(Breakdown::ShadowOrthogonal));
}

#[test]
fn gmres_handles_permutation_that_breaks_bicgstab() {
    let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let out = solve(&a, &[1.0, 0.0], &SolverSpec::new(SolverKind::Gmres { restart: 30 })).unwrap();
    assert!(out.converged);
    assert!(rel_err(&out.x, &[0.0, 1.0]) < 1e-14);
}

#[test]
fn iteration_cap_is_respected() {
    let a = banded_nonsymmetric(200, 4, 1).unwrap();
    let b = random_rhs(200, 2).unwrap();
    for kind in all_kinds().into_iter().skip(1) {
        let kind = match kind {
            SolverKind::Richardson { .. } => SolverKind::Richardson { omega: 0.05 },
            k => k,
        };
        let spec = SolverSpec::new(kind).with_tol(1e-14).with_max_iterations(3);
        let out = solve(&a, &b, &spec).unwrap();
        assert_eq!(out.status, SolveStatus::MaxIterations, "{kind:?}");
        assert_eq!(out.iterations, 3, "{kind:?}");
        assert!(out.final_residual > 1e-14);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let a = SparseMatrix::identity(2);
    assert!(matches!(
        solve(&a, &[0.0, 0.0], &SolverSpec::new(SolverKind::Cg)),
        Err(SolverError::Matrix(MatrixError::ZeroRhs))
    ));
    assert!(solve(&a, &[1.0], &SolverSpec::new(SolverKind::Cg)).is_err());
    let rect = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap();
    assert!(solve(&rect, &[1.0, 1.0], &SolverSpec::new(SolverKind::Cg)).is_err());
    for kind in [SolverKind::Gmres { restart: 0 }, SolverKind::Richardson { omega: 0.0 }] {
        assert!(matches!(
            solve(&a, &[1.0, 1.0], &SolverSpec::new(kind)),
            Err(SolverError::Spec(_))
        ));
    }
    assert!(solve(&a, &[1.0, 1.0], &SolverSpec::new(SolverKind::Cg).with_tol(0.0)).is_err());
}

#[test]
fn spec_serde_round_trip() {
    let spec = SolverSpec::new(SolverKind::Gmres { restart: 30 });
    let json = serde_json::to_string(&spec).unwrap();
    assert_eq!(json, r#"{"kind":"gmres","restart":30,"tol":0.00001,"max_iterations":10000}"#);
    assert_eq!(serde_json::from_str::<SolverSpec>(&json).unwrap(), spec);
    let parsed: SolverSpec = serde_json::from_str(r#"{"kind":"cg"}"#).unwrap();
    assert_eq!(parsed, SolverSpec::new(SolverKind::Cg));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn krylov_agrees_with_lu(n in 2usize..100, seed in 0u64..1000, kind_ix in 0usize..3) {
        let kind = [SolverKind::Cg, SolverKind::Gmres { restart: 30 }, SolverKind::Bicgstab][kind_ix];
        let a = random_diag_dominant_spd(n, 0.2, 1.0, seed).unwrap();
        let b = random_rhs(n, seed + 1).unwrap();
        let out = solve(&a, &b, &SolverSpec::new(kind)).unwrap();
        prop_assert!(out.converged);
        prop_assert!(out.final_residual <= 1e-5);
        prop_assert!(rel_err(&out.x, &lu_solve(&a, &b)) <= 1e-4);
        if kind == SolverKind::Cg {
            prop_assert!(out.iterations <= n);
        }
    }

    #[test]
    fn converged_implies_residual_within_tol(n in 2usize..40, seed in 0u64..1000, tol_exp in 3i32..11) {
        let tol = 10f64.powi(-tol_exp);
        let a = banded_nonsymmetric(n, 2, seed).unwrap();
        let b = random_rhs(n, seed).unwrap();
        for kind in [SolverKind::Gmres { restart: 5 }, SolverKind::Bicgstab] {
            let out = solve(&a, &b, &SolverSpec::new(kind).with_tol(tol)).unwrap();
            if out.converged {
                prop_assert!(out.final_residual <= tol);
                prop_assert!((relative_residual(&a, &out.x, &b).unwrap() - out.final_residual).abs() < 1e-15);
            }
        }
    }
}
