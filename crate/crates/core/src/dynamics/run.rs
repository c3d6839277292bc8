use serde::{Deserialize, Serialize};

use super::integrate::{step, Coupling};
use super::{linearization_floor, CavityParams, DynamicsError, DynamicsMode, Integrator, LaserState};
use crate::encoding::{decode, shrink_scale, wrap_phase, LpuProblem};
use crate::sparse::{relative_residual, MatrixError, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub mode: DynamicsMode,
    pub integrator: Integrator,
    /// Target relative residual `‖Ax - b‖ / ‖b‖` on the original system.
    pub tol: f64,
    /// Roundtrips between digital residual checks.
    pub check_every: u64,
    /// Cap on cumulative roundtrips, restarts included.
    pub max_roundtrips: u64,
    pub max_restarts: u32,
    /// `β` multiplier applied when a phase leaves the small-angle budget.
    pub theta_shrink: f64,
    /// Shrink `β` when the sine nonlinearity alone would keep the residual
    /// above `tol` (see [`linearization_floor`]).
    pub adaptive_scale: bool,
    pub record_trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: DynamicsMode::PHASE,
            integrator: Integrator::Euler,
            tol: 1e-5,
            check_every: 100,
            max_roundtrips: 1_000_000,
            max_restarts: 12,
            theta_shrink: 0.5,
            adaptive_scale: true,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Cumulative roundtrip at which the check ran.
    pub roundtrip: u64,
    pub residual: f64,
    pub max_phase: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxRoundtrips,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub roundtrips: u64,
    /// Always `roundtrips * roundtrip_ns`: modelled device time, not wall clock.
    pub time_ns: u64,
    pub roundtrip_ns: u64,
    pub converged: bool,
    pub termination: Termination,
    pub final_residual: f64,
    pub residual_trace: Vec<TracePoint>,
    pub max_phase_seen: f64,
    pub decoded_x: Vec<f64>,
    pub restarts: u32,
    pub final_beta: f64,
    /// Spread of |E_i| over the problem lasers at the end of the run.
    pub amplitude_spread: f64,
}

impl RunResult {
    pub fn time_accounting_holds(&self) -> bool {
        self.roundtrips.checked_mul(self.roundtrip_ns) == Some(self.time_ns)
    }
}

fn max_phase_offset(phases: &[f64]) -> f64 {
    let reference = phases[0];
    phases[1..]
        .iter()
        .map(|p| wrap_phase(p - reference).abs())
        .fold(0.0, f64::max)
}

fn steps_per_roundtrip(dt: f64) -> Result<u64, DynamicsError> {
    let steps = (1.0 / dt).round();
    if dt > 1.0 || steps < 1.0 || (steps * dt - 1.0).abs() > 1e-9 {
        return Err(DynamicsError::Config(format!(
            "dt must divide one roundtrip evenly, got {dt}"
        )));
    }
    Ok(steps as u64)
}

/// Evolves an encoded problem from the aligned state until the decoded
/// solution meets `cfg.tol` on the original `(a, b)`.
///
/// Every roundtrip the largest phase offset is compared with the problem's
/// `theta_max`; a violation shrinks `β` by `cfg.theta_shrink` and restarts from
/// the aligned state. Every `check_every` roundtrips the phases are decoded and
/// the true residual is computed; with `adaptive_scale` the nonlinearity floor
/// is estimated as well and `β` is shrunk (with a restart) when the floor
/// exceeds half the tolerance. Roundtrips accumulate across restarts.
///
/// Running out of roundtrips yields a non-converged result; running out of
/// restarts or producing non-finite values is an error.
pub fn run(
    problem: &LpuProblem,
    a: &SparseMatrix,
    b: &[f64],
    params: &CavityParams,
    cfg: &RunConfig,
) -> Result<RunResult, DynamicsError> {
    params.validate()?;
    if !(cfg.tol > 0.0) || cfg.check_every == 0 {
        return Err(DynamicsError::Config(
            "tol must be positive and check_every at least 1".into(),
        ));
    }
    if !(cfg.theta_shrink > 0.0 && cfg.theta_shrink < 1.0) {
        return Err(DynamicsError::Config(format!(
            "theta_shrink must lie in (0, 1), got {}",
            cfg.theta_shrink
        )));
    }
    if matches!(cfg.mode, DynamicsMode::GenericCavity) {
        return Err(DynamicsError::ModeMismatch(cfg.mode));
    }
    let n = a.ensure_square()?;
    if n != problem.n || b.len() != n {
        return Err(MatrixError::DimensionMismatch {
            expected: problem.n,
            got: if n != problem.n { n } else { b.len() },
        }
        .into());
    }
    let substeps = steps_per_roundtrip(params.dt)?;

    let mut current = problem.clone();
    let mut total: u64 = 0;
    let mut restarts: u32 = 0;
    let mut trace = Vec::new();
    let mut max_phase_seen: f64 = 0.0;

    let finish = |state: &LaserState,
                  current: &LpuProblem,
                  total: u64,
                  restarts: u32,
                  trace: Vec<TracePoint>,
                  max_phase_seen: f64,
                  residual: Option<(Vec<f64>, f64)>|
     -> Result<RunResult, DynamicsError> {
        let (x, res) = match residual {
            Some(pair) => pair,
            None => {
                let x = decode(state.phases(), current)?;
                let r = relative_residual(a, &x, b)?;
                (x, r)
            }
        };
        let converged = res <= cfg.tol;
        Ok(RunResult {
            roundtrips: total,
            time_ns: total * params.roundtrip_ns,
            roundtrip_ns: params.roundtrip_ns,
            converged,
            termination: if converged {
                Termination::Converged
            } else {
                Termination::MaxRoundtrips
            },
            final_residual: res,
            residual_trace: trace,
            max_phase_seen,
            decoded_x: x,
            restarts,
            final_beta: current.beta,
            amplitude_spread: state.amplitude_spread(1),
        })
    };

    let restart = |current: &mut LpuProblem,
                       restarts: &mut u32,
                       factor: f64,
                       total: u64|
     -> Result<(), DynamicsError> {
        *restarts += 1;
        if *restarts > cfg.max_restarts {
            return Err(DynamicsError::RestartBudgetExhausted {
                restarts: *restarts - 1,
                roundtrips: total,
            });
        }
        *current = shrink_scale(current, factor)?;
        Ok(())
    };

    'attempt: loop {
        let mut state = LaserState::aligned(n + 1, params);
        let mut attempt: u64 = 0;
        loop {
            if total >= cfg.max_roundtrips {
                return finish(&state, &current, total, restarts, trace, max_phase_seen, None);
            }
            for _ in 0..substeps {
                state = step(&state, cfg.mode, Coupling::Encoded(&current), params, cfg.integrator)
                    .map_err(|e| match e {
                        DynamicsError::NonFinite => DynamicsError::Diverged { roundtrip: total + 1 },
                        other => other,
                    })?;
            }
            total += 1;
            attempt += 1;

            let max_phase = max_phase_offset(state.phases());
            max_phase_seen = max_phase_seen.max(max_phase);
            if max_phase > current.theta_max {
                restart(&mut current, &mut restarts, cfg.theta_shrink, total)?;
                continue 'attempt;
            }

            if attempt.is_multiple_of(cfg.check_every) {
                let x = decode(state.phases(), &current)?;
                let residual = relative_residual(a, &x, b)?;
                if !residual.is_finite() {
                    return Err(DynamicsError::Diverged { roundtrip: total });
                }
                if cfg.record_trace {
                    trace.push(TracePoint {
                        roundtrip: total,
                        residual,
                        max_phase,
                        beta: current.beta,
                    });
                }
                if residual <= cfg.tol {
                    return finish(
                        &state,
                        &current,
                        total,
                        restarts,
                        trace,
                        max_phase_seen,
                        Some((x, residual)),
                    );
                }
                if cfg.adaptive_scale {
                    let floor = linearization_floor(state.phases(), &current)?;
                    if floor > 0.5 * cfg.tol {
                        // The floor scales with β², aim for a quarter of tol.
                        let factor = (0.25 * cfg.tol / floor).sqrt().clamp(1e-3, 0.5);
                        restart(&mut current, &mut restarts, factor, total)?;
                        continue 'attempt;
                    }
                }
            }
        }
    }
}
