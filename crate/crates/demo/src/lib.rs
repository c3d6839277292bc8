//! wasm-bindgen entry points for the browser demo. Every export returns a JSON
//! string so the page needs no generated bindings beyond plain functions.

use lpu_core::dynamics::{
    run, step, CavityParams, Coupling, DynamicsMode, Integrator, LaserState, PhaseKernel, RunConfig,
};
use lpu_core::encoding::{decode, encode, EncodingConfig};
use lpu_core::generate::{banded_spd, random_rhs};
use lpu_core::krylov::{solve, SolverKind, SolverSpec};
use lpu_core::{relative_residual, SparseMatrix};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_N: usize = 2000;

fn problem(n: usize, bandwidth: usize, seed: u64) -> Result<(SparseMatrix, Vec<f64>), String> {
    if n == 0 || n > MAX_N {
        return Err(format!("n must be between 1 and {MAX_N}"));
    }
    let a = banded_spd(n, bandwidth, seed).map_err(|e| e.to_string())?;
    let b = random_rhs(n, seed ^ 0x5eed).map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn mode_from(name: &str) -> Result<DynamicsMode, String> {
    match name {
        "phase" => Ok(DynamicsMode::PhaseOnly(PhaseKernel::Sine)),
        "phase-linear" => Ok(DynamicsMode::PhaseOnly(PhaseKernel::Linearized)),
        "full-field" => Ok(DynamicsMode::FullField),
        other => Err(format!("unknown mode '{other}'")),
    }
}

#[derive(Serialize)]
struct EmulateView {
    n: usize,
    mode: &'static str,
    converged: bool,
    roundtrips: u64,
    time_ns: u64,
    restarts: u32,
    final_beta: f64,
    final_residual: f64,
    /// (roundtrip, residual) pairs.
    trace: Vec<(u64, f64)>,
    x: Vec<f64>,
}

pub fn emulate_json(n: usize, bandwidth: usize, seed: u64, mode: &str, beta: f64) -> Result<String, String> {
    let (a, b) = problem(n, bandwidth, seed)?;
    let p = encode(&a, &b, &EncodingConfig { beta_init: beta, ..Default::default() }).map_err(|e| e.to_string())?;
    let cfg = RunConfig {
        mode: mode_from(mode)?,
        check_every: 10,
        max_roundtrips: 200_000,
        ..Default::default()
    };
    let r = run(&p, &a, &b, &CavityParams::default(), &cfg).map_err(|e| e.to_string())?;
    let view = EmulateView {
        n,
        mode: cfg.mode.label(),
        converged: r.converged,
        roundtrips: r.roundtrips,
        time_ns: r.time_ns,
        restarts: r.restarts,
        final_beta: r.final_beta,
        final_residual: r.final_residual,
        trace: r.residual_trace.iter().map(|t| (t.roundtrip, t.residual)).collect(),
        x: r.decoded_x,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct FlowView {
    omega: f64,
    /// Residual of the decoded phases after each roundtrip.
    laser: Vec<f64>,
    /// Residual of the matching Richardson iterate.
    richardson: Vec<f64>,
    max_difference: f64,
}

/// Linearised phase flow next to Richardson iteration with ω = dt·g/σ.
pub fn flow_json(n: usize, bandwidth: usize, seed: u64, steps: usize) -> Result<String, String> {
    let (a, b) = problem(n, bandwidth, seed)?;
    let p = encode(&a, &b, &EncodingConfig::default()).map_err(|e| e.to_string())?;
    let params = CavityParams::default();
    let omega = params.dt * params.steady_gain_factor() / p.sigma;
    let mode = DynamicsMode::PhaseOnly(PhaseKernel::Linearized);
    let mut s = LaserState::aligned(n + 1, &params);
    let mut x = vec![0.0; n];
    let mut view = FlowView { omega, laser: vec![], richardson: vec![], max_difference: 0.0 };
    for _ in 0..steps.min(20_000) {
        s = step(&s, mode, Coupling::Encoded(&p), &params, Integrator::Euler).map_err(|e| e.to_string())?;
        let ax = a.spmv(&x).map_err(|e| e.to_string())?;
        for i in 0..n {
            x[i] += omega * (b[i] - ax[i]);
        }
        let decoded = decode(s.phases(), &p).map_err(|e| e.to_string())?;
        let diff = decoded.iter().zip(&x).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        view.max_difference = view.max_difference.max(diff);
        view.laser.push(relative_residual(&a, &decoded, &b).map_err(|e| e.to_string())?);
        view.richardson.push(relative_residual(&a, &x, &b).map_err(|e| e.to_string())?);
    }
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SolverView {
    solver: String,
    converged: bool,
    /// Iterations for the digital solvers, roundtrips for the emulator.
    steps: u64,
    residual: f64,
    history: Vec<(u64, f64)>,
}

pub fn compare_json(n: usize, bandwidth: usize, seed: u64, tol: f64) -> Result<String, String> {
    let (a, b) = problem(n, bandwidth, seed)?;
    let mut out = Vec::new();
    for kind in [SolverKind::Cg, SolverKind::Gmres { restart: 30 }, SolverKind::Bicgstab] {
        let spec = SolverSpec::new(kind).with_tol(tol);
        let o = solve(&a, &b, &spec).map_err(|e| e.to_string())?;
        out.push(SolverView {
            solver: kind.label(),
            converged: o.converged,
            steps: o.iterations as u64,
            residual: o.final_residual,
            history: o.residual_history.iter().enumerate().map(|(i, r)| (i as u64, *r)).collect(),
        });
    }
    let p = encode(&a, &b, &EncodingConfig::default()).map_err(|e| e.to_string())?;
    let cfg = RunConfig { tol, check_every: 10, ..Default::default() };
    let r = run(&p, &a, &b, &CavityParams::default(), &cfg).map_err(|e| e.to_string())?;
    out.push(SolverView {
        solver: format!("lpu-{}", cfg.mode.label()),
        converged: r.converged,
        steps: r.roundtrips,
        residual: r.final_residual,
        history: r.residual_trace.iter().map(|t| (t.roundtrip, t.residual)).collect(),
    });
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn emulate(n: usize, bandwidth: usize, seed: u32, mode: &str, beta: f64) -> Result<String, JsValue> {
    emulate_json(n, bandwidth, seed.into(), mode, beta).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn phase_flow(n: usize, bandwidth: usize, seed: u32, steps: usize) -> Result<String, JsValue> {
    flow_json(n, bandwidth, seed.into(), steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn compare(n: usize, bandwidth: usize, seed: u32, tol: f64) -> Result<String, JsValue> {
    compare_json(n, bandwidth, seed.into(), tol).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn emulate_converges_and_reports_model_time() {
        let v: Value = serde_json::from_str(&emulate_json(60, 3, 1, "phase", 1e-3).unwrap()).unwrap();
        assert_eq!(v["converged"], true);
        assert!(v["final_residual"].as_f64().unwrap() <= 1e-5);
        assert_eq!(v["time_ns"].as_u64(), v["roundtrips"].as_u64().map(|r| r * 20));
        assert_eq!(v["x"].as_array().unwrap().len(), 60);
        assert!(!v["trace"].as_array().unwrap().is_empty());
    }

    #[test]
    fn flow_tracks_richardson() {
        let v: Value = serde_json::from_str(&flow_json(40, 2, 3, 300).unwrap()).unwrap();
        assert!(v["max_difference"].as_f64().unwrap() < 1e-12);
        let laser = v["laser"].as_array().unwrap();
        assert_eq!(laser.len(), 300);
        assert!(laser[299].as_f64().unwrap() < laser[0].as_f64().unwrap());
    }

    #[test]
    fn compare_lists_all_solvers() {
        let v: Value = serde_json::from_str(&compare_json(80, 4, 2, 1e-5).unwrap()).unwrap();
        let labels: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["solver"].as_str().unwrap()).collect();
        assert_eq!(labels, ["cg", "gmres(30)", "bicgstab", "lpu-phase"]);
        assert!(v.as_array().unwrap().iter().all(|s| s["converged"] == true));
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(emulate_json(0, 1, 0, "phase", 1e-3).is_err());
        assert!(emulate_json(10, 1, 0, "warp", 1e-3).is_err());
        assert!(flow_json(MAX_N + 1, 1, 0, 10).is_err());
    }
}
