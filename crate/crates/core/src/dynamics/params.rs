use serde::{Deserialize, Serialize};

use super::DynamicsError;

/// Cavity and gain-medium constants. Times are measured in roundtrips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CavityParams {
    /// Roundtrip time; the unit of simulated time.
    pub tau: f64,
    /// Gain relaxation time.
    pub tau_g: f64,
    /// Pump strength.
    pub pump: f64,
    /// Roundtrip loss.
    pub alpha: f64,
    /// Steady field amplitude `D`.
    pub amplitude: f64,
    /// Integrator step, in roundtrips.
    pub dt: f64,
    /// Physical duration of one roundtrip.
    pub roundtrip_ns: u64,
}

impl Default for CavityParams {
    fn default() -> Self {
        let alpha = 0.1;
        let amplitude = 1.0;
        Self {
            tau: 1.0,
            tau_g: 10.0,
            // Chosen so the stationary gain at |E| = D equals the loss: g = 1.
            pump: 2.0 * alpha * (1.0 + amplitude * amplitude),
            alpha,
            amplitude,
            dt: 1.0,
            roundtrip_ns: 20,
        }
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            ("tau", self.tau),
            ("tau_g", self.tau_g),
            ("dt", self.dt),
            ("pump", self.pump),
            ("amplitude", self.amplitude),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DynamicsError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(DynamicsError::Config(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Gain at which `dG/dt = 0` for a field of magnitude `field_abs`.
    pub fn stationary_gain(&self, field_abs: f64) -> f64 {
        self.pump / (2.0 * (1.0 + field_abs * field_abs))
    }

    /// Gain/loss factor of a laser sitting at the stationary gain for |E| = D.
    pub fn steady_gain_factor(&self) -> f64 {
        super::gain_loss(self.stationary_gain(self.amplitude), self.alpha)
    }
}
