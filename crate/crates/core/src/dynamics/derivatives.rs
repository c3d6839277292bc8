//! Right-hand sides of the laser rate equations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CavityParams, DynamicsError, LaserState};
use crate::encoding::LpuProblem;

/// `g = exp(G - α)`: net amplification of a laser with gain `G`.
pub fn gain_loss(gain: f64, alpha: f64) -> f64 {
    (gain - alpha).exp()
}

/// `dG/dt = (P - 2G(1 + |E|²)) / τ_G`.
pub fn gain_derivative(gain: f64, field: Complex64, params: &CavityParams) -> f64 {
    (params.pump - 2.0 * gain * (1.0 + field.norm_sqr())) / params.tau_g
}

/// Dense complex coupling matrix `K` for the generic cavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityCoupling {
    n: usize,
    entries: Vec<Complex64>,
}

impl CavityCoupling {
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self, DynamicsError> {
        if entries.len() != n * n {
            return Err(DynamicsError::Dimension {
                expected: n * n,
                got: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, DynamicsError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(DynamicsError::Dimension {
                    expected: n,
                    got: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }
}

fn check_encoded_len(state_len: usize, problem: &LpuProblem) -> Result<(), DynamicsError> {
    if state_len != problem.n + 1 {
        return Err(DynamicsError::Dimension {
            expected: problem.n + 1,
            got: state_len,
        });
    }
    Ok(())
}

/// Field equation of the solver cavity, per unit time:
///
/// `τ dE_i/dt = Σ_j a_ij g_j E_j - i b_i g_i E_i + c_i g_0 E_0` for `i ≥ 1`.
///
/// The reference laser (index 0) is held fixed, so its entry is zero.
pub fn field_derivative(
    state: &LaserState,
    problem: &LpuProblem,
    params: &CavityParams,
) -> Result<Vec<Complex64>, DynamicsError> {
    check_encoded_len(state.len(), problem)?;
    let fields = state.fields();
    let g: Vec<f64> = state
        .gains()
        .iter()
        .map(|&gain| gain_loss(gain, params.alpha))
        .collect();
    let reference = g[0] * fields[0];
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    for i in 0..problem.n {
        let (cols, vals) = problem.a_enc.row(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&j, &a) in cols.iter().zip(vals) {
            acc += a * g[j + 1] * fields[j + 1];
        }
        let own = fields[i + 1];
        // −i·b·g·E: a quarter-turn rotation of the laser's own field.
        acc += Complex64::new(0.0, -problem.b_enc[i]) * g[i + 1] * own;
        acc += problem.c[i] * reference;
        out[i + 1] = acc / params.tau;
    }
    Ok(out)
}

/// Phase velocity at uniform amplitude (imaginary part of the field equation):
///
/// `φ̇_i = g [Σ_j a_ij sin(φ_j - φ_i) - b_i + c_i sin(φ_0 - φ_i)]`, `φ̇_0 = 0`.
pub fn phase_derivative(
    phases: &[f64],
    problem: &LpuProblem,
    g: f64,
) -> Result<Vec<f64>, DynamicsError> {
    phase_flow(phases, problem, g, f64::sin)
}

/// Small-angle version of [`phase_derivative`] with `sin u` replaced by `u`.
/// Its fixed point is exactly `A_enc (φ - φ_0) = b_enc`.
pub fn phase_derivative_linearized(
    phases: &[f64],
    problem: &LpuProblem,
    g: f64,
) -> Result<Vec<f64>, DynamicsError> {
    phase_flow(phases, problem, g, |u| u)
}

fn phase_flow(
    phases: &[f64],
    problem: &LpuProblem,
    g: f64,
    coupling: impl Fn(f64) -> f64,
) -> Result<Vec<f64>, DynamicsError> {
    check_encoded_len(phases.len(), problem)?;
    let reference = phases[0];
    let mut out = vec![0.0; phases.len()];
    for i in 0..problem.n {
        let own = phases[i + 1];
        let (cols, vals) = problem.a_enc.row(i);
        let mut acc = 0.0;
        for (&j, &a) in cols.iter().zip(vals) {
            acc += a * coupling(phases[j + 1] - own);
        }
        acc -= problem.b_enc[i];
        acc += problem.c[i] * coupling(reference - own);
        out[i + 1] = g * acc;
    }
    Ok(out)
}

/// Generic degenerate-cavity field equation, per unit time:
///
/// `τ dE_i/dt = g_i K_ii E_i + Σ_{j≠i} g_j K_ij E_j - g_i E_i`, with
/// `g_i = exp(G_i - α)`.
pub fn cavity_derivative(
    state: &LaserState,
    coupling: &CavityCoupling,
    params: &CavityParams,
) -> Result<Vec<Complex64>, DynamicsError> {
    let n = coupling.size();
    if state.len() != n {
        return Err(DynamicsError::Dimension {
            expected: n,
            got: state.len(),
        });
    }
    let fields = state.fields();
    let g: Vec<f64> = state
        .gains()
        .iter()
        .map(|&gain| gain_loss(gain, params.alpha))
        .collect();
    Ok((0..n)
        .map(|i| {
            let mut acc = g[i] * coupling.get(i, i) * fields[i];
            for j in (0..n).filter(|&j| j != i) {
                acc += g[j] * coupling.get(i, j) * fields[j];
            }
            acc -= g[i] * fields[i];
            acc / params.tau
        })
        .collect())
}

/// Nonlinearity defect `‖lin(φ) - sin(φ)‖ / ‖b_enc‖` of the phase flow.
///
/// At a fixed point of the sine flow the linear flow equals this defect, so
/// it estimates the residual floor reachable with the current `β`.
pub fn linearization_floor(phases: &[f64], problem: &LpuProblem) -> Result<f64, DynamicsError> {
    let lin = phase_derivative_linearized(phases, problem, 1.0)?;
    let nl = phase_derivative(phases, problem, 1.0)?;
    let diff: f64 = lin
        .iter()
        .zip(&nl)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / crate::sparse::norm2(&problem.b_enc))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::encoding::{encode, EncodingConfig};
    use crate::sparse::SparseMatrix;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gain_loss_values() {
        assert_eq!(gain_loss(0.3, 0.3), 1.0);
        assert_relative_eq!(gain_loss(0.1 + 2f64.ln(), 0.1), 2.0, epsilon = 1e-15);
        assert_relative_eq!(gain_loss(0.0, 0.1), 0.904_837_418_035_959_6, epsilon = 1e-15);
    }

    #[test]
    fn gain_derivative_values() {
        let mut p = CavityParams::default();
        let e = c(0.6, 0.8);
        assert_eq!(gain_derivative(p.stationary_gain(1.0), e, &p), 0.0);
        assert_eq!(gain_derivative(0.0, c(0.0, 0.0), &p), p.pump / p.tau_g);
        p.pump = 1.0;
        p.tau_g = 1.0;
        assert_eq!(gain_derivative(0.25, c(1.0, 0.0), &p), 0.0);
    }

    fn spd2() -> LpuProblem {
        let a = SparseMatrix::from_dense(&[vec![3.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        encode(
            &a,
            &[1.0, -2.0],
            &EncodingConfig {
                beta_init: 0.05,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn field_derivative_vanishes_on_aligned_state_without_b() {
        let mut p = spd2();
        p.b_enc = vec![0.0; 2];
        let params = CavityParams::default();
        let state = LaserState::from_phases(&[0.4; 3], 1.0, vec![0.2; 3]).unwrap();
        for d in field_derivative(&state, &p, &params).unwrap() {
            assert!(d.norm() < 1e-15, "{d}");
        }
    }

    #[test]
    fn field_derivative_is_phase_equivariant() {
        let p = spd2();
        let params = CavityParams::default();
        let base = LaserState::from_phases(&[0.0, 0.03, -0.02], 1.0, vec![0.15, 0.2, 0.25]).unwrap();
        let delta = 1.3;
        let rot = Complex64::from_polar(1.0, delta);
        let shifted = LaserState::from_fields(
            base.fields().iter().map(|e| e * rot).collect(),
            base.gains().to_vec(),
        )
        .unwrap();
        let d0 = field_derivative(&base, &p, &params).unwrap();
        let d1 = field_derivative(&shifted, &p, &params).unwrap();
        for (a, b) in d0.iter().zip(&d1) {
            assert!((a * rot - b).norm() < 1e-14);
        }
    }

    #[test]
    fn field_derivative_matches_dense_complex_oracle() {
        let p = spd2();
        let params = CavityParams::default();
        let fields = vec![c(1.0, 0.0), c(0.9, 0.2), c(1.1, -0.3)];
        let gains = vec![0.1, 0.3, 0.05];
        let state = LaserState::from_fields(fields.clone(), gains.clone()).unwrap();
        let g: Vec<f64> = gains.iter().map(|x| (x - params.alpha).exp()).collect();
        let a = p.a_enc.to_dense();
        let mut expected = vec![c(0.0, 0.0); 3];
        for i in 0..2 {
            let mut acc = c(0.0, 0.0);
            for j in 0..2 {
                acc += c(a[i][j], 0.0) * c(g[j + 1], 0.0) * fields[j + 1];
            }
            acc -= c(0.0, 1.0) * c(p.b_enc[i], 0.0) * c(g[i + 1], 0.0) * fields[i + 1];
            acc += c(p.c[i], 0.0) * c(g[0], 0.0) * fields[0];
            expected[i + 1] = acc;
        }
        let got = field_derivative(&state, &p, &params).unwrap();
        for (x, y) in got.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-14);
        }
        assert_eq!(got[0], c(0.0, 0.0));
    }

    #[test]
    fn field_derivative_dimension_mismatch() {
        let p = spd2();
        let state = LaserState::aligned(2, &CavityParams::default());
        assert!(field_derivative(&state, &p, &CavityParams::default()).is_err());
    }

    #[test]
    fn phase_derivative_zero_and_gauge_cases() {
        let mut p = spd2();
        let phases = [0.1, 0.15, 0.05];
        let d = phase_derivative(&phases, &p, 1.0).unwrap();
        let shifted: Vec<f64> = phases.iter().map(|x| x + 0.9).collect();
        let ds = phase_derivative(&shifted, &p, 1.0).unwrap();
        for (a, b) in d.iter().zip(&ds) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(d[0], 0.0);
        p.b_enc = vec![0.0; 2];
        assert!(phase_derivative(&[0.7; 3], &p, 1.0)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(phase_derivative(&[0.0; 2], &p, 1.0).is_err());
    }

    #[test]
    fn phase_flow_is_imaginary_part_of_field_flow() {
        // At uniform amplitude and gain, Im(E_i* Ė_i)/D² = φ̇_i.
        let p = spd2();
        let params = CavityParams::default();
        let phases = [0.0, 0.2, -0.1];
        let g0 = params.stationary_gain(1.0);
        let state = LaserState::from_phases(&phases, 1.0, vec![g0; 3]).unwrap();
        let fd = field_derivative(&state, &p, &params).unwrap();
        let pd = phase_derivative(&phases, &p, params.steady_gain_factor()).unwrap();
        for i in 1..3 {
            let rate = (state.fields()[i].conj() * fd[i]).im;
            assert_relative_eq!(rate, pd[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn cavity_derivative_cases() {
        let params = CavityParams::default();
        let state = LaserState::from_fields(vec![c(0.3, 0.4), c(-1.0, 0.2)], vec![0.2, 0.05]).unwrap();
        for d in cavity_derivative(&state, &CavityCoupling::identity(2), &params).unwrap() {
            assert_eq!(d, c(0.0, 0.0));
        }
        let zero = CavityCoupling::new(2, vec![c(0.0, 0.0); 4]).unwrap();
        let d = cavity_derivative(&state, &zero, &params).unwrap();
        for i in 0..2 {
            let expected = -gain_loss(state.gains()[i], params.alpha) * state.fields()[i] / params.tau;
            assert!((d[i] - expected).norm() < 1e-15);
        }
        // Symmetric 2-laser coupling with equal gains, worked by hand.
        let k = CavityCoupling::from_rows(&[
            vec![c(0.8, 0.0), c(0.1, 0.05)],
            vec![c(0.1, 0.05), c(0.8, 0.0)],
        ])
        .unwrap();
        let st = LaserState::from_fields(vec![c(1.0, 0.0), c(0.0, 1.0)], vec![0.1, 0.1]).unwrap();
        let d = cavity_derivative(&st, &k, &params).unwrap();
        // g = 1: 0.8·1 + (0.1+0.05i)·i − 1 = −0.25 + 0.1i ; 0.8i + (0.1+0.05i) − i = 0.1 − 0.15i
        assert!((d[0] - c(-0.25, 0.1)).norm() < 1e-14);
        assert!((d[1] - c(0.1, -0.15)).norm() < 1e-14);
        assert!(cavity_derivative(&st, &CavityCoupling::identity(3), &params).is_err());
    }
}
