use crate::state::BiphotonState;
use crate::{Error, Result, C64};

/// Output norms below this fraction of [`CouplerConfig::amplitude_scale`]
/// count as no pair generation.
pub const GENERATION_FLOOR: f64 = 1e-6;

/// Physical parameters of the coupler and its pump.
///
/// Lengths are in metres and propagation constants in 1/m. The solvers work
/// in the dimensionless products `L·c` and `Δβ/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerConfig {
    /// Coupling constant `c` of the signal/idler modes (1/m).
    pub coupling: f64,
    /// Sample length `L` (m).
    pub length: f64,
    /// Pair-generation amplitude `γ`.
    pub gamma: f64,
    /// Classical pump amplitude in waveguide 1.
    pub pump1: f64,
    /// Classical pump amplitude in waveguide 2.
    pub pump2: f64,
    /// Pump phase difference `Δφ` (rad), applied to the waveguide-2 pump.
    pub pump_phase: f64,
    /// Degenerate phase mismatch `Δβ₀` (1/m).
    pub mismatch: f64,
}

impl CouplerConfig {
    /// Coupling constant of the measured device (1/m).
    pub const DEVICE_COUPLING: f64 = 33.0;
    /// Length of the measured device (m).
    pub const DEVICE_LENGTH: f64 = 0.0475;

    /// The measured device: `c = 33 /m`, `L = 47.5 mm`, equal unit pumps,
    /// `γ = 1`, `Δφ = 0`, `Δβ₀ = 0`.
    pub const fn device() -> Self {
        Self {
            coupling: Self::DEVICE_COUPLING,
            length: Self::DEVICE_LENGTH,
            gamma: 1.0,
            pump1: 1.0,
            pump2: 1.0,
            pump_phase: 0.0,
            mismatch: 0.0,
        }
    }

    /// Equal unit pumps, `γ = 1`, with the length chosen so `L·c` equals
    /// `coupling_length` exactly.
    pub fn normalized(coupling: f64, coupling_length: f64) -> Self {
        Self {
            coupling,
            length: coupling_length / coupling,
            ..Self::device()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field, reason| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter { field, reason })
            }
        };
        check(
            self.coupling.is_finite() && self.coupling > 0.0,
            "coupling",
            "must be finite and > 0",
        )?;
        check(
            self.length.is_finite() && self.length > 0.0,
            "length",
            "must be finite and > 0",
        )?;
        check(
            self.gamma.is_finite() && self.gamma >= 0.0,
            "gamma",
            "must be finite and >= 0",
        )?;
        check(
            self.pump1.is_finite() && self.pump1 >= 0.0,
            "pump1",
            "must be finite and >= 0",
        )?;
        check(
            self.pump2.is_finite() && self.pump2 >= 0.0,
            "pump2",
            "must be finite and >= 0",
        )?;
        check(self.pump_phase.is_finite(), "pump_phase", "must be finite")?;
        check(self.mismatch.is_finite(), "mismatch", "must be finite")?;
        Ok(())
    }

    /// `L·c`.
    pub fn coupling_length(&self) -> f64 {
        self.length * self.coupling
    }

    /// `Δβ₀ / c`.
    pub fn mismatch_over_c(&self) -> f64 {
        self.mismatch / self.coupling
    }

    pub fn with_pump_phase(self, pump_phase: f64) -> Self {
        Self { pump_phase, ..self }
    }

    pub fn with_mismatch_over_c(self, mismatch_over_c: f64) -> Self {
        Self {
            mismatch: mismatch_over_c * self.coupling,
            ..self
        }
    }

    pub fn with_pumps(self, pump1: f64, pump2: f64) -> Self {
        Self { pump1, pump2, ..self }
    }

    /// `γ (|A₁| + |A₂|) L`, the order of magnitude of the output amplitudes.
    pub fn amplitude_scale(&self) -> f64 {
        self.gamma.abs() * (self.pump1.abs() + self.pump2.abs()) * self.length
    }

    /// Normalizes an output state of this configuration, failing with
    /// [`Error::Degenerate`] when its norm is below [`GENERATION_FLOOR`]
    /// times the amplitude scale.
    pub fn normalize_output(&self, state: &BiphotonState) -> Result<BiphotonState> {
        if state.norm() <= GENERATION_FLOOR * self.amplitude_scale() {
            return Err(Error::Degenerate("pair generation vanishes"));
        }
        state.normalize()
    }

    /// Complex source amplitudes `(γA₁, γA₂ e^{iΔφ})`.
    pub fn sources(&self) -> (C64, C64) {
        (
            C64::new(self.gamma * self.pump1, 0.0),
            C64::from_polar(self.gamma * self.pump2, self.pump_phase),
        )
    }
}

impl Default for CouplerConfig {
    fn default() -> Self {
        Self::device()
    }
}
