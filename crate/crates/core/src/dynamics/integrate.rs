use num_complex::Complex64;

use super::derivatives::{
    cavity_derivative, field_derivative, gain_derivative, phase_derivative,
    phase_derivative_linearized, CavityCoupling,
};
use super::{CavityParams, DynamicsError, DynamicsMode, Integrator, LaserState, PhaseKernel};
use crate::encoding::LpuProblem;

/// What the lasers are coupled through.
#[derive(Debug, Clone, Copy)]
pub enum Coupling<'a> {
    Encoded(&'a LpuProblem),
    Cavity(&'a CavityCoupling),
}

fn advance(
    y: &[f64],
    h: f64,
    integrator: Integrator,
    f: impl Fn(&[f64]) -> Result<Vec<f64>, DynamicsError>,
) -> Result<Vec<f64>, DynamicsError> {
    let axpy = |a: &[f64], s: f64, d: &[f64]| -> Vec<f64> {
        a.iter().zip(d).map(|(x, dx)| x + s * dx).collect()
    };
    match integrator {
        Integrator::Euler => {
            let k1 = f(y)?;
            Ok(axpy(y, h, &k1))
        }
        Integrator::Rk4 => {
            let k1 = f(y)?;
            let k2 = f(&axpy(y, 0.5 * h, &k1))?;
            let k3 = f(&axpy(y, 0.5 * h, &k2))?;
            let k4 = f(&axpy(y, h, &k3))?;
            Ok(y.iter()
                .enumerate()
                .map(|(i, x)| x + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        }
    }
}

// Flat layout for field modes: [re_0, im_0, re_1, im_1, ..., G_0, G_1, ...].
fn flatten(state: &LaserState) -> Vec<f64> {
    let mut y = Vec::with_capacity(3 * state.len());
    for e in state.fields() {
        y.push(e.re);
        y.push(e.im);
    }
    y.extend_from_slice(state.gains());
    y
}

fn unflatten(y: &[f64], lasers: usize) -> Result<LaserState, DynamicsError> {
    let fields = (0..lasers)
        .map(|i| Complex64::new(y[2 * i], y[2 * i + 1]))
        .collect();
    LaserState::from_fields(fields, y[2 * lasers..].to_vec())
}

/// Advances the state by `params.dt` roundtrips.
///
/// * `PhaseOnly` integrates the phase equation with gains held fixed and
///   re-imposes `|E_i| = D` on every laser after the step.
/// * `FullField` integrates the complex fields and the gains jointly; the
///   reference laser (field and gain) is held fixed.
/// * `GenericCavity` integrates every laser of the cavity with its gain.
pub fn step(
    state: &LaserState,
    mode: DynamicsMode,
    coupling: Coupling<'_>,
    params: &CavityParams,
    integrator: Integrator,
) -> Result<LaserState, DynamicsError> {
    let h = params.dt * params.tau;
    let next = match (mode, coupling) {
        (DynamicsMode::PhaseOnly(kernel), Coupling::Encoded(problem)) => {
            let g = params.steady_gain_factor();
            let tau = params.tau;
            let flow = |phases: &[f64]| {
                let mut d = match kernel {
                    PhaseKernel::Sine => phase_derivative(phases, problem, g)?,
                    PhaseKernel::Linearized => phase_derivative_linearized(phases, problem, g)?,
                };
                if tau != 1.0 {
                    d.iter_mut().for_each(|v| *v /= tau);
                }
                Ok(d)
            };
            let phases = advance(state.phases(), h, integrator, flow)?;
            let mut next = state.clone();
            for (i, &p) in phases.iter().enumerate().skip(1) {
                next.set_phase(i, p, params.amplitude);
            }
            next
        }
        (DynamicsMode::FullField, Coupling::Encoded(problem)) => {
            let lasers = state.len();
            if lasers != problem.n + 1 {
                return Err(DynamicsError::Dimension {
                    expected: problem.n + 1,
                    got: lasers,
                });
            }
            let flow = |y: &[f64]| {
                let s = unflatten(y, lasers)?;
                let de = field_derivative(&s, problem, params)?;
                let mut d = flatten_derivative(&de, &s, params);
                // Reference gain is pinned along with its field.
                d[2 * lasers] = 0.0;
                Ok(d)
            };
            let y = advance(&flatten(state), h, integrator, flow)?;
            let mut next = unflatten(&y, lasers)?;
            next.set_field(0, state.fields()[0]);
            next.set_gain(0, state.gains()[0]);
            next
        }
        (DynamicsMode::GenericCavity, Coupling::Cavity(k)) => {
            let lasers = state.len();
            let flow = |y: &[f64]| {
                let s = unflatten(y, lasers)?;
                let de = cavity_derivative(&s, k, params)?;
                Ok(flatten_derivative(&de, &s, params))
            };
            let y = advance(&flatten(state), h, integrator, flow)?;
            unflatten(&y, lasers)?
        }
        (mode, _) => return Err(DynamicsError::ModeMismatch(mode)),
    };
    if !next.is_finite() {
        return Err(DynamicsError::NonFinite);
    }
    Ok(next)
}

fn flatten_derivative(de: &[Complex64], s: &LaserState, params: &CavityParams) -> Vec<f64> {
    let mut d = Vec::with_capacity(3 * s.len());
    for e in de {
        d.push(e.re);
        d.push(e.im);
    }
    // τ_G is counted in roundtrips; convert to per-unit-time like the fields.
    let tau = params.tau;
    d.extend(
        s.gains()
            .iter()
            .zip(s.fields())
            .map(|(&g, &e)| gain_derivative(g, e, params) / tau),
    );
    d
}

/// Advances only the gains by `params.dt` roundtrips, holding every field fixed.
pub fn step_gains_frozen(
    state: &LaserState,
    params: &CavityParams,
    integrator: Integrator,
) -> Result<LaserState, DynamicsError> {
    let h = params.dt;
    let fields = state.fields();
    let flow = |g: &[f64]| {
        Ok(g.iter()
            .zip(fields)
            .map(|(&gain, &e)| gain_derivative(gain, e, params))
            .collect())
    };
    let gains = advance(state.gains(), h, integrator, flow)?;
    let mut next = state.clone();
    for (i, g) in gains.into_iter().enumerate() {
        next.set_gain(i, g);
    }
    if !next.is_finite() {
        return Err(DynamicsError::NonFinite);
    }
    Ok(next)
}
