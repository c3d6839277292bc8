use super::*;
use crate::encoding::{decode, encode, shrink_scale, EncodingConfig, LpuProblem, Sign};
use crate::generate::{random_diag_dominant_spd, random_rhs};
use crate::sparse::{relative_residual, SparseMatrix};
use crate::test_support::{lu_solve, rel_err};
use num_complex::Complex64;

fn spd_system(n: usize, seed: u64) -> (SparseMatrix, Vec<f64>) {
    let a = random_diag_dominant_spd(n, 0.3, 1.0, seed).unwrap();
    let b = random_rhs(n, seed + 1000).unwrap();
    (a, b)
}

fn encoded(a: &SparseMatrix, b: &[f64], beta: f64, sign: Sign) -> LpuProblem {
    encode(
        a,
        b,
        &EncodingConfig {
            beta_init: beta,
            sign,
            ..Default::default()
        },
    )
    .unwrap()
}

#[test]
fn stationary_states_are_fixed_bitwise_under_euler() {
    let (a, b) = spd_system(6, 1);
    let mut p = encoded(&a, &b, 1e-3, Sign::Stabilized);
    p.b_enc = vec![0.0; 6];
    let params = CavityParams::default();
    let s0 = LaserState::aligned(7, &params);
    for mode in [DynamicsMode::PHASE, DynamicsMode::FullField] {
        let s1 = step(&s0, mode, Coupling::Encoded(&p), &params, Integrator::Euler).unwrap();
        assert_eq!(s1, s0, "{mode:?}");
    }
    // K = I cancels the loss term; gains sit at P/(2(1+D²)).
    let cavity = CavityCoupling::identity(3);
    let s = LaserState::from_phases(&[0.1, 0.2, 0.3], 1.0, vec![0.1; 3]).unwrap();
    let next = step(
        &s,
        DynamicsMode::GenericCavity,
        Coupling::Cavity(&cavity),
        &params,
        Integrator::Euler,
    )
    .unwrap();
    for (x, y) in next.fields().iter().zip(s.fields()) {
        assert_eq!(x, y);
    }
    assert_eq!(next.gains(), s.gains());
}

#[test]
fn mode_and_coupling_must_agree() {
    let (a, b) = spd_system(3, 2);
    let p = encoded(&a, &b, 1e-3, Sign::Stabilized);
    let params = CavityParams::default();
    let s = LaserState::aligned(4, &params);
    let err = step(&s, DynamicsMode::GenericCavity, Coupling::Encoded(&p), &params, Integrator::Euler);
    assert!(matches!(err, Err(DynamicsError::ModeMismatch(_))));
    let k = CavityCoupling::identity(4);
    let err = step(&s, DynamicsMode::PHASE, Coupling::Cavity(&k), &params, Integrator::Euler);
    assert!(matches!(err, Err(DynamicsError::ModeMismatch(_))));
}

#[test]
fn phase_only_keeps_amplitude_at_d() {
    let (a, b) = spd_system(8, 3);
    let p = encoded(&a, &b, 0.05, Sign::Stabilized);
    let params = CavityParams { amplitude: 1.7, ..Default::default() };
    let mut s = LaserState::aligned(9, &params);
    for _ in 0..20 {
        s = step(&s, DynamicsMode::PHASE, Coupling::Encoded(&p), &params, Integrator::Euler).unwrap();
        for e in s.fields() {
            assert!((e.norm() - 1.7).abs() < 1e-15);
        }
    }
}

#[test]
fn euler_linearized_phase_step_is_richardson() {
    let (a, b) = spd_system(10, 4);
    let p = encoded(&a, &b, 1e-2, Sign::Stabilized);
    let params = CavityParams::default();
    let g = params.steady_gain_factor();
    let omega = params.dt * g / p.sigma;
    let mode = DynamicsMode::PhaseOnly(PhaseKernel::Linearized);
    let mut s = LaserState::aligned(11, &params);
    let mut x = vec![0.0; 10];
    for _ in 0..200 {
        s = step(&s, mode, Coupling::Encoded(&p), &params, Integrator::Euler).unwrap();
        let ax = a.spmv(&x).unwrap();
        for i in 0..10 {
            x[i] += omega * (b[i] - ax[i]);
        }
        let decoded = decode(s.phases(), &p).unwrap();
        assert!(rel_err(&decoded, &x) < 1e-12);
    }
}

#[test]
fn small_angle_fixed_point_defect_is_cubic() {
    let (a, b) = spd_system(5, 5);
    let beta = 1e-3;
    let p = encoded(&a, &b, beta, Sign::Stabilized);
    let x = lu_solve(&a, &b);
    let mut phases = vec![0.0];
    phases.extend(x.iter().map(|v| beta * v));
    let g = 1.0;
    let d = phase_derivative(&phases, &p, g).unwrap();
    let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // |u - sin u| ≤ |u|³/6 with |u| ≤ 2β‖x‖∞, row weights ≤ ‖a_i‖₁ + |c_i| ≤ 2.
    let bound = g * beta.powi(3) * (2.0 * xmax).powi(3) * 2.0 / 6.0;
    let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // The linear part is only zero up to rounding of the LU solution.
    assert!(dmax <= bound + 1e-15, "{dmax} > {bound}");
}

#[test]
fn rk4_and_euler_full_field_agree() {
    let (a, b) = spd_system(5, 6);
    let p = encoded(&a, &b, 1e-2, Sign::Stabilized);
    let params = CavityParams { dt: 0.1, ..Default::default() };
    let mut xs = Vec::new();
    for integrator in [Integrator::Euler, Integrator::Rk4] {
        let mut s = LaserState::aligned(6, &params);
        for _ in 0..1000 {
            s = step(&s, DynamicsMode::FullField, Coupling::Encoded(&p), &params, integrator).unwrap();
        }
        xs.push(decode(s.phases(), &p).unwrap());
    }
    let diff = xs[0]
        .iter()
        .zip(&xs[1])
        .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
    assert!(diff <= 1e-4, "{diff}");
}

#[test]
fn frozen_fields_drive_gains_to_stationary_value() {
    let params = CavityParams::default();
    let fields: Vec<Complex64> = (0..6)
        .map(|i| Complex64::from_polar(0.3 + 0.2 * i as f64, 0.4 * i as f64))
        .collect();
    let gains = vec![0.0, 0.5, 1.0, 0.05, 0.3, 0.9];
    let mut s = LaserState::from_fields(fields, gains).unwrap();
    for _ in 0..300 {
        s = step_gains_frozen(&s, &params, Integrator::Euler).unwrap();
    }
    for (g, e) in s.gains().iter().zip(s.fields()) {
        assert!((g - params.stationary_gain(e.norm())).abs() < 1e-10);
    }
}

#[test]
fn gauge_shift_leaves_phase_differences_invariant() {
    let (a, b) = spd_system(12, 7);
    let p = encoded(&a, &b, 0.05, Sign::Stabilized);
    let params = CavityParams::default();
    let g0 = vec![params.stationary_gain(1.0); 13];
    let mut s0 = LaserState::from_phases(&[0.0; 13], 1.0, g0.clone()).unwrap();
    let mut s1 = LaserState::from_phases(&[0.7; 13], 1.0, g0).unwrap();
    for _ in 0..500 {
        s0 = step(&s0, DynamicsMode::PHASE, Coupling::Encoded(&p), &params, Integrator::Euler).unwrap();
        s1 = step(&s1, DynamicsMode::PHASE, Coupling::Encoded(&p), &params, Integrator::Euler).unwrap();
        for i in 1..13 {
            let d0 = s0.phases()[i] - s0.phases()[0];
            let d1 = s1.phases()[i] - s1.phases()[0];
            assert!((d0 - d1).abs() < 1e-12);
        }
    }
}

#[test]
fn identity_system_converges_to_b() {
    let a = SparseMatrix::identity(4);
    let b = vec![0.5, -1.0, 0.25, 2.0];
    let p = encoded(&a, &b, 1e-3, Sign::Stabilized);
    let cfg = RunConfig {
        check_every: 1,
        ..Default::default()
    };
    let r = run(&p, &a, &b, &CavityParams::default(), &cfg).unwrap();
    assert!(r.converged);
    assert!(r.time_accounting_holds());
    assert_eq!(r.time_ns, r.roundtrips * 20);
    for (x, y) in r.decoded_x.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-5 * 2.0);
    }
}

#[test]
fn spd_phase_run_matches_lu() {
    let (a, b) = spd_system(50, 8);
    let p = encoded(&a, &b, 1e-3, Sign::Stabilized);
    let cfg = RunConfig {
        check_every: 10,
        ..Default::default()
    };
    let r = run(&p, &a, &b, &CavityParams::default(), &cfg).unwrap();
    assert!(r.converged, "{r:?}");
    assert!(r.final_residual <= 1e-5);
    assert!(rel_err(&r.decoded_x, &lu_solve(&a, &b)) <= 1e-4);
    assert!(r.time_accounting_holds());
    assert_eq!(relative_residual(&a, &r.decoded_x, &b).unwrap(), r.final_residual);
}

#[test]
fn adaptive_scale_recovers_from_a_large_beta() {
    let (a, b) = spd_system(20, 9);
    let p = encoded(&a, &b, 0.2, Sign::Stabilized);
    let cfg = RunConfig {
        check_every: 20,
        ..Default::default()
    };
    let r = run(&p, &a, &b, &CavityParams::default(), &cfg).unwrap();
    assert!(r.converged);
    assert!(r.restarts >= 1);
    assert!(r.final_beta < 0.2);
    let without = RunConfig {
        adaptive_scale: false,
        max_roundtrips: 2000,
        ..cfg
    };
    let r = run(&p, &a, &b, &CavityParams::default(), &without).unwrap();
    assert!(!r.converged);
    assert_eq!(r.termination, Termination::MaxRoundtrips);
    assert_eq!(r.roundtrips, 2000);
    assert!(r.time_accounting_holds());
}

#[test]
fn as_written_sign_runs_away_on_spd() {
    // With the literal sign the small-angle flow is φ̇ = +(A/σ)φ - …; every
    // eigenvalue of an SPD A is positive, so phases grow without bound.
    let (a, b) = spd_system(5, 10);
    let p = encoded(&a, &b, 1e-3, Sign::AsWritten);
    let err = run(&p, &a, &b, &CavityParams::default(), &RunConfig::default()).unwrap_err();
    assert!(matches!(
        err,
        DynamicsError::RestartBudgetExhausted { .. } | DynamicsError::Diverged { .. }
    ));
}

#[test]
fn shrinking_a_converged_problem_keeps_x() {
    let (a, b) = spd_system(10, 11);
    let p = encoded(&a, &b, 1e-3, Sign::Stabilized);
    let cfg = RunConfig {
        check_every: 10,
        ..Default::default()
    };
    let params = CavityParams::default();
    let r1 = run(&p, &a, &b, &params, &cfg).unwrap();
    let r2 = run(&shrink_scale(&p, 0.5).unwrap(), &a, &b, &params, &cfg).unwrap();
    assert!(r1.converged && r2.converged);
    assert!(rel_err(&r2.decoded_x, &r1.decoded_x) <= 1e-4);
}

#[test]
fn scale_consistency_across_betas() {
    let (a, b) = spd_system(15, 12);
    let params = CavityParams::default();
    let cfg = RunConfig {
        tol: 1e-13,
        adaptive_scale: false,
        check_every: 50,
        max_roundtrips: 3000,
        ..Default::default()
    };
    let x_ref = lu_solve(&a, &b);
    let xs: Vec<Vec<f64>> = [0.01, 0.005]
        .iter()
        .map(|&beta| {
            let p = encoded(&a, &b, beta, Sign::Stabilized);
            run(&p, &a, &b, &params, &cfg).unwrap().decoded_x
        })
        .collect();
    assert!(rel_err(&xs[0], &xs[1]) <= 1e-3);
    assert!(rel_err(&xs[1], &x_ref) <= rel_err(&xs[0], &x_ref));
}

#[test]
fn run_validates_inputs() {
    let (a, b) = spd_system(4, 13);
    let p = encoded(&a, &b, 1e-3, Sign::Stabilized);
    let params = CavityParams::default();
    let bad_tol = RunConfig {
        tol: 0.0,
        ..Default::default()
    };
    assert!(run(&p, &a, &b, &params, &bad_tol).is_err());
    let generic = RunConfig {
        mode: DynamicsMode::GenericCavity,
        ..Default::default()
    };
    assert!(run(&p, &a, &b, &params, &generic).is_err());
    let mut odd_dt = params;
    odd_dt.dt = 0.3;
    assert!(run(&p, &a, &b, &odd_dt, &RunConfig::default()).is_err());
    assert!(run(&p, &a, &b[..3], &params, &RunConfig::default()).is_err());
}
