//! Mapping a linear system onto laser couplings and reading the answer back.
//!
//! Lasers `1..=n` carry the unknowns; laser 0 is the reference. Each laser `i`
//! receives `a_ij` from laser `j`, a 90° self-injection proportional to `b_i`,
//! and `c_i = -Σ_j a_ij` from the reference. At steady state in the small-angle
//! regime the phase offsets `φ_i - φ_0` satisfy `A_enc φ = b_enc`.
//!
//! Scaling: `A_enc = s·A/σ` with `σ` the largest row 1-norm, and
//! `b_enc = s·(β/σ)·b`, so the encoded steady state is `φ = β·x`. The sign `s`
//! is `-1` for [`Sign::Stabilized`] (the small-angle flow becomes a contracting
//! Richardson flow for matrices with spectrum in the right half-plane) and `+1`
//! for [`Sign::AsWritten`].

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::{norm2, MatrixError, SparseMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,
    #[error("invalid encoding config: {0}")]
    Config(String),
    #[error("phase vector has length {got}, expected n + 1 = {expected}")]
    PhaseLength { expected: usize, got: usize },
    #[error("non-finite phase at index {0}")]
    NonFinitePhase(usize),
    #[error("shrink factor must lie in (0, 1), got {0}")]
    ShrinkFactor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemMode {
    Direct,
    /// Encode `AᵀA x = Aᵀb` instead of `A x = b`.
    NormalEquations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Stabilized,
    AsWritten,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Stabilized => -1.0,
            Sign::AsWritten => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingConfig {
    /// Largest tolerated phase offset from the reference, radians.
    pub theta_max: f64,
    pub system_mode: SystemMode,
    pub beta_init: f64,
    pub sign: Sign,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            theta_max: 0.3,
            system_mode: SystemMode::Direct,
            beta_init: 1e-3,
            sign: Sign::Stabilized,
        }
    }
}

impl EncodingConfig {
    pub fn validate(&self) -> Result<(), EncodeError> {
        if !(self.theta_max > 0.0 && self.theta_max < FRAC_PI_2) {
            return Err(EncodeError::Config(format!(
                "theta_max must lie in (0, π/2), got {}",
                self.theta_max
            )));
        }
        if !(self.beta_init > 0.0 && self.beta_init.is_finite()) {
            return Err(EncodeError::Config(format!(
                "beta_init must be positive, got {}",
                self.beta_init
            )));
        }
        Ok(())
    }
}

/// A machine-ready instance: couplings, reference couplings and scalings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpuProblem {
    pub a_enc: SparseMatrix,
    pub b_enc: Vec<f64>,
    pub c: Vec<f64>,
    pub beta: f64,
    pub sigma: f64,
    pub n: usize,
    pub sign: Sign,
    pub system_mode: SystemMode,
    pub theta_max: f64,
}

/// `c_i = -Σ_j a_ij`, summed in stored column order.
pub fn reference_couplings(a: &SparseMatrix) -> Vec<f64> {
    a.row_sums().into_iter().map(|s| -s).collect()
}

pub fn encode(a: &SparseMatrix, b: &[f64], cfg: &EncodingConfig) -> Result<LpuProblem, EncodeError> {
    cfg.validate()?;
    let n = a.ensure_square()?;
    if b.len() != n {
        return Err(MatrixError::DimensionMismatch {
            expected: n,
            got: b.len(),
        }
        .into());
    }
    if let Some(i) = b.iter().position(|v| !v.is_finite()) {
        return Err(EncodeError::Config(format!("non-finite b at index {i}")));
    }
    if norm2(b) == 0.0 {
        return Err(MatrixError::ZeroRhs.into());
    }

    let (system, rhs) = match cfg.system_mode {
        SystemMode::Direct => (a.clone(), b.to_vec()),
        SystemMode::NormalEquations => {
            let at = a.transpose();
            let gram = at.matmul(a)?;
            let atb = at.spmv(b)?;
            if norm2(&atb) == 0.0 {
                return Err(MatrixError::ZeroRhs.into());
            }
            (gram, atb)
        }
    };

    let sigma = system.max_row_abs_sum();
    if sigma == 0.0 {
        return Err(EncodeError::ZeroMatrix);
    }
    let s = cfg.sign.factor();
    let a_enc = system.map_values(|v| s * (v / sigma));
    let b_scale = s * (cfg.beta_init / sigma);
    let b_enc = rhs.iter().map(|v| b_scale * v).collect();
    let c = reference_couplings(&a_enc);

    Ok(LpuProblem {
        a_enc,
        b_enc,
        c,
        beta: cfg.beta_init,
        sigma,
        n,
        sign: cfg.sign,
        system_mode: cfg.system_mode,
        theta_max: cfg.theta_max,
    })
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = angle % two_pi;
    if w > PI {
        w -= two_pi;
    } else if w <= -PI {
        w += two_pi;
    }
    w
}

/// `x_i = (φ_i - φ_0) / β`; index 0 of `phases` is the reference laser.
pub fn decode(phases: &[f64], problem: &LpuProblem) -> Result<Vec<f64>, EncodeError> {
    if phases.len() != problem.n + 1 {
        return Err(EncodeError::PhaseLength {
            expected: problem.n + 1,
            got: phases.len(),
        });
    }
    if problem.beta == 0.0 {
        return Err(EncodeError::Config("beta is zero".into()));
    }
    if let Some(i) = phases.iter().position(|p| !p.is_finite()) {
        return Err(EncodeError::NonFinitePhase(i));
    }
    let reference = phases[0];
    Ok(phases[1..]
        .iter()
        .map(|p| wrap_phase(p - reference) / problem.beta)
        .collect())
}

/// Shrinks `β` (and `b_enc` with it) by `factor`; couplings are untouched.
pub fn shrink_scale(problem: &LpuProblem, factor: f64) -> Result<LpuProblem, EncodeError> {
    if !(factor > 0.0 && factor < 1.0) {
        return Err(EncodeError::ShrinkFactor(factor));
    }
    let mut out = problem.clone();
    out.beta *= factor;
    for v in &mut out.b_enc {
        *v *= factor;
    }
    Ok(out)
}
