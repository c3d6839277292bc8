use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CavityParams, DynamicsError};

/// Complex fields and gains of every laser. Index 0 is the reference laser
/// whenever the state belongs to an encoded problem.
///
/// Phases are tracked alongside the fields so phase-only evolution never
/// round-trips through `arg`; `phases[i]` always equals `arg(fields[i])`
/// modulo 2π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserState {
    fields: Vec<Complex64>,
    gains: Vec<f64>,
    phases: Vec<f64>,
}

impl LaserState {
    /// All lasers in phase with the reference at amplitude `D`, gains stationary.
    pub fn aligned(lasers: usize, params: &CavityParams) -> Self {
        let g = params.stationary_gain(params.amplitude);
        Self::from_phases(&vec![0.0; lasers], params.amplitude, vec![g; lasers])
            .expect("lengths agree")
    }

    pub fn from_phases(
        phases: &[f64],
        amplitude: f64,
        gains: Vec<f64>,
    ) -> Result<Self, DynamicsError> {
        if gains.len() != phases.len() {
            return Err(DynamicsError::Dimension {
                expected: phases.len(),
                got: gains.len(),
            });
        }
        Ok(Self {
            fields: phases
                .iter()
                .map(|&p| Complex64::from_polar(amplitude, p))
                .collect(),
            gains,
            phases: phases.to_vec(),
        })
    }

    pub fn from_fields(fields: Vec<Complex64>, gains: Vec<f64>) -> Result<Self, DynamicsError> {
        if gains.len() != fields.len() {
            return Err(DynamicsError::Dimension {
                expected: fields.len(),
                got: gains.len(),
            });
        }
        let phases = fields.iter().map(|e| e.arg()).collect();
        Ok(Self {
            fields,
            gains,
            phases,
        })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[Complex64] {
        &self.fields
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub(super) fn set_phase(&mut self, i: usize, phase: f64, amplitude: f64) {
        self.phases[i] = phase;
        self.fields[i] = Complex64::from_polar(amplitude, phase);
    }

    pub(super) fn set_field(&mut self, i: usize, field: Complex64) {
        self.fields[i] = field;
        self.phases[i] = field.arg();
    }

    pub(super) fn set_gain(&mut self, i: usize, gain: f64) {
        self.gains[i] = gain;
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(|e| e.re.is_finite() && e.im.is_finite())
            && self.gains.iter().all(|g| g.is_finite())
            && self.phases.iter().all(|p| p.is_finite())
    }

    /// `max |E_i| - min |E_i|` over lasers `from..`.
    pub fn amplitude_spread(&self, from: usize) -> f64 {
        let mags = self.fields.iter().skip(from).map(|e| e.norm());
        let (lo, hi) = mags.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
            (lo.min(m), hi.max(m))
        });
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }
}
