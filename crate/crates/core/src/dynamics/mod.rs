//! Coupled-laser dynamics: rate equations, time stepping and monitored runs.

mod derivatives;
mod integrate;
mod params;
mod run;
mod state;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use derivatives::{
    cavity_derivative, field_derivative, gain_derivative, gain_loss, linearization_floor,
    phase_derivative, phase_derivative_linearized, CavityCoupling,
};
pub use integrate::{step, step_gains_frozen, Coupling};
pub use params::CavityParams;
pub use run::{run, RunConfig, RunResult, Termination, TracePoint};
pub use state::LaserState;

use crate::encoding::EncodeError;
use crate::sparse::MatrixError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("state became non-finite")]
    NonFinite,
    #[error("dynamics diverged at roundtrip {roundtrip}")]
    Diverged { roundtrip: u64 },
    #[error("restart budget exhausted after {restarts} restarts ({roundtrips} roundtrips)")]
    RestartBudgetExhausted { restarts: u32, roundtrips: u64 },
    #[error("mode {0:?} cannot be used with this coupling")]
    ModeMismatch(DynamicsMode),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Phase-equation coupling function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKernel {
    /// `sin(φ_j - φ_i)`, the physical phase equation.
    Sine,
    /// `φ_j - φ_i`, its small-angle limit.
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsMode {
    /// Complex fields plus gain saturation.
    FullField,
    /// Uniform-amplitude phase equation.
    PhaseOnly(PhaseKernel),
    /// Bare cavity with an explicit coupling matrix `K`.
    GenericCavity,
}

impl DynamicsMode {
    pub const PHASE: DynamicsMode = DynamicsMode::PhaseOnly(PhaseKernel::Sine);

    pub fn label(&self) -> &'static str {
        match self {
            DynamicsMode::FullField => "full-field",
            DynamicsMode::PhaseOnly(PhaseKernel::Sine) => "phase",
            DynamicsMode::PhaseOnly(PhaseKernel::Linearized) => "phase-linear",
            DynamicsMode::GenericCavity => "generic-cavity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    Euler,
    Rk4,
}

#[cfg(test)]
mod tests;
