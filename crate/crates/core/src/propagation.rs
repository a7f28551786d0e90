//! Direct integration of the coupled-mode equations
//!
//! ```text
//! dΨ11/dz = ic(Ψ12 + Ψ21) + γA₁         exp(iΦ(z))
//! dΨ22/dz = ic(Ψ12 + Ψ21) + γA₂e^{iΔφ}  exp(iΦ(z))
//! dΨ12/dz = dΨ21/dz = ic(Ψ11 + Ψ22)
//! ```
//!
//! with `Φ(z) = ∫₀^z Δβ(ω, z′) dz′` and `Δβ(ω, z) = Δβ₀ + Δβ_ω(ω) + δβ(z)`.
//! Ψ12 and Ψ21 obey the same equation from the same vacuum start, so they are
//! carried as one variable. The phase integral is evaluated exactly from the
//! antiderivative of the polynomial profile.

use alloc::vec::Vec;

use crate::config::{CouplerConfig, GENERATION_FLOOR};
use crate::state::BiphotonState;
use crate::{math, Error, Result, C64};

pub const MIN_STEPS: usize = 100;
pub const DEFAULT_STEPS: usize = 2000;
/// Relative change on step doubling above which [`integrate`] fails.
pub const CONVERGENCE_LIMIT: f64 = 1e-4;
/// Upper bound on the phase advance per step used by the spectral drivers.
pub const MAX_PHASE_PER_STEP: f64 = 0.02;

/// Local mismatch deviation `δβ(z)/c` as a polynomial in `s = z/L ∈ [0, 1]`.
/// Coefficients are in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InhomogeneityProfile {
    coefficients: Vec<f64>,
}

impl InhomogeneityProfile {
    pub fn homogeneous() -> Self {
        Self::default()
    }

    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if !coefficients.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "profile",
                reason: "coefficients must be finite",
            });
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn is_homogeneous(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    /// `δβ/c` at normalized position `s`.
    pub fn value(&self, s: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// `∫₀^s δβ/c ds′`.
    pub fn integral(&self, s: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * s + c / (k + 1) as f64)
            * s
    }

    /// `max |δβ/c|` over a fine sampling of `[0, 1]`.
    pub fn max_abs(&self) -> f64 {
        const SAMPLES: usize = 512;
        (0..=SAMPLES)
            .map(|i| self.value(i as f64 / SAMPLES as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Quadratic frequency-dependent mismatch `Δβ_ω(ω) = D (ω − ω₀)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionModel {
    /// `D` in 1/(m·(rad/s)²).
    pub curvature: f64,
    /// Degenerate signal frequency `ω₀` (rad/s).
    pub center: f64,
}

impl DispersionModel {
    pub fn new(curvature: f64, center: f64) -> Result<Self> {
        let d = Self { curvature, center };
        d.validate()?;
        Ok(d)
    }

    /// No frequency dependence.
    pub fn none(center: f64) -> Self {
        Self { curvature: 0.0, center }
    }

    /// Curvature chosen so that `Δβ_ω(ω₀ ± offset) = mismatch`.
    pub fn with_mismatch_at(center: f64, offset: f64, mismatch: f64) -> Result<Self> {
        if !(offset != 0.0 && offset.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "dispersion",
                reason: "reference offset must be finite and non-zero",
            });
        }
        Self::new(mismatch / (offset * offset), center)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.curvature.is_finite() {
            return Err(Error::InvalidParameter {
                field: "dispersion.curvature",
                reason: "must be finite",
            });
        }
        if !(self.center.is_finite() && self.center > 0.0) {
            return Err(Error::InvalidParameter {
                field: "dispersion.center",
                reason: "must be finite and > 0",
            });
        }
        Ok(())
    }

    /// `Δβ_ω(ω)` in 1/m.
    pub fn mismatch(&self, omega: f64) -> f64 {
        let d = omega - self.center;
        self.curvature * d * d
    }
}

/// The three contributions to the local mismatch (1/m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchTerms {
    pub degenerate: f64,
    pub dispersive: f64,
    pub inhomogeneous: f64,
}

impl MismatchTerms {
    pub fn total(&self) -> f64 {
        self.degenerate + self.dispersive + self.inhomogeneous
    }
}

/// `Δβ(ω, z) = Δβ₀ + Δβ_ω(ω) + δβ(z)`, term by term.
pub fn total_mismatch(
    config: &CouplerConfig,
    dispersion: &DispersionModel,
    profile: &InhomogeneityProfile,
    omega: f64,
    z: f64,
) -> Result<MismatchTerms> {
    if !(0.0..=config.length).contains(&z) {
        return Err(Error::OutOfDomain {
            z,
            length: config.length,
        });
    }
    Ok(MismatchTerms {
        degenerate: config.mismatch,
        dispersive: dispersion.mismatch(omega),
        inhomogeneous: config.coupling * profile.value(z / config.length),
    })
}

/// Accumulated source phase `Φ(z)` for one frequency.
struct SourcePhase<'a> {
    uniform: f64,
    profile_scale: f64,
    length: f64,
    profile: &'a InhomogeneityProfile,
}

impl<'a> SourcePhase<'a> {
    fn new(
        config: &CouplerConfig,
        dispersion: &DispersionModel,
        profile: &'a InhomogeneityProfile,
        omega: f64,
    ) -> Self {
        Self {
            uniform: config.mismatch + dispersion.mismatch(omega),
            profile_scale: config.coupling * config.length,
            length: config.length,
            profile,
        }
    }

    fn at(&self, z: f64) -> f64 {
        let inhomogeneous = if self.profile.is_homogeneous() {
            0.0
        } else {
            self.profile_scale * self.profile.integral(z / self.length)
        };
        self.uniform * z + inhomogeneous
    }

    /// Bound on `|dΦ/dz|`.
    fn max_rate(&self) -> f64 {
        self.uniform.abs() + self.profile_scale / self.length * self.profile.max_abs()
    }
}

type Fields = [C64; 3];

/// Classical RK4 for `N` independent source pairs sharing one phase history.
/// Each output is `[Ψ11, Ψ22, Ψ12]` at `z = L`.
fn propagate<const N: usize>(
    sources: [(C64, C64); N],
    coupling: f64,
    length: f64,
    phase: &SourcePhase<'_>,
    steps: usize,
) -> [Fields; N] {
    let zero = C64::new(0.0, 0.0);
    let ic = C64::new(0.0, coupling);
    let h = length / steps as f64;
    let rhs = |y: &Fields, drive: C64, (s1, s2): (C64, C64)| -> Fields {
        let cross = ic * (y[2] + y[2]);
        [cross + s1 * drive, cross + s2 * drive, ic * (y[0] + y[1])]
    };
    let axpy = |y: &Fields, k: &Fields, a: f64| -> Fields { [y[0] + k[0] * a, y[1] + k[1] * a, y[2] + k[2] * a] };

    let mut ys = [[zero; 3]; N];
    let mut drive_start = C64::cis(phase.at(0.0));
    for n in 0..steps {
        let z = n as f64 * h;
        let drive_mid = C64::cis(phase.at(z + 0.5 * h));
        let drive_end = C64::cis(phase.at(if n + 1 == steps { length } else { z + h }));
        for (y, &src) in ys.iter_mut().zip(&sources) {
            let k1 = rhs(y, drive_start, src);
            let k2 = rhs(&axpy(y, &k1, 0.5 * h), drive_mid, src);
            let k3 = rhs(&axpy(y, &k2, 0.5 * h), drive_mid, src);
            let k4 = rhs(&axpy(y, &k3, h), drive_end, src);
            for i in 0..3 {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        drive_start = drive_end;
    }
    ys
}

fn fields_to_state(y: &Fields) -> BiphotonState {
    BiphotonState::waveguide(y[0], y[2], y[2], y[1])
}

/// Result of [`integrate_with_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    /// Unnormalized output state from the finer of the two runs.
    pub state: BiphotonState,
    /// Step count of the finer run.
    pub steps: usize,
    /// `‖Ψ(2n) − Ψ(n)‖ / ‖Ψ(2n)‖`, with the norm floored at
    /// [`GENERATION_FLOOR`] times the
    /// amplitude scale.
    pub relative_change: f64,
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidParameter {
            field: "steps",
            reason: "at least 100 integration steps are required",
        });
    }
    Ok(())
}

/// Runs `steps` and `2·steps` and compares. `floor` is the smallest
/// per-response norm used in the relative change.
fn converged<const N: usize>(
    sources: [(C64, C64); N],
    config: &CouplerConfig,
    phase: &SourcePhase<'_>,
    steps: usize,
    floor: f64,
) -> Result<([Fields; N], usize, f64)> {
    let coarse = propagate(sources, config.coupling, config.length, phase, steps);
    let fine = propagate(sources, config.coupling, config.length, phase, 2 * steps);
    let (mut diff, mut norm) = (0.0, 0.0);
    for (a, b) in coarse.iter().flatten().zip(fine.iter().flatten()) {
        diff += (a - b).norm_sqr();
        norm += b.norm_sqr();
    }
    let scale = math::sqrt(norm).max(floor * math::sqrt(N as f64));
    let relative_change = if scale > 0.0 { math::sqrt(diff) / scale } else { 0.0 };
    if relative_change > CONVERGENCE_LIMIT || !relative_change.is_finite() {
        return Err(Error::NotConverged { steps, relative_change });
    }
    Ok((fine, 2 * steps, relative_change))
}

/// Fixed-step RK4 integration from vacuum at `z = 0` to `z = L`, verified by
/// step doubling.
pub fn integrate_with_report(
    config: &CouplerConfig,
    dispersion: &DispersionModel,
    profile: &InhomogeneityProfile,
    omega: f64,
    steps: usize,
) -> Result<Integration> {
    config.validate()?;
    dispersion.validate()?;
    check_steps(steps)?;
    let phase = SourcePhase::new(config, dispersion, profile, omega);
    let (fields, steps, relative_change) = converged(
        [config.sources()],
        config,
        &phase,
        steps,
        GENERATION_FLOOR * config.amplitude_scale(),
    )?;
    Ok(Integration {
        state: fields_to_state(&fields[0]),
        steps,
        relative_change,
    })
}

/// Unnormalized waveguide-basis state at the output facet.
pub fn integrate(
    config: &CouplerConfig,
    dispersion: &DispersionModel,
    profile: &InhomogeneityProfile,
    omega: f64,
    steps: usize,
) -> Result<BiphotonState> {
    integrate_with_report(config, dispersion, profile, omega, steps).map(|r| r.state)
}

/// Responses to a unit-amplitude source (`γ = 1`) in waveguide 1 and in
/// waveguide 2. The equations are linear in the source, so any pump
/// configuration is a combination of the two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpResponse {
    waveguide1: Fields,
    waveguide2: Fields,
}

impl PumpResponse {
    /// `γA₁·R₁ + γA₂e^{iΔφ}·R₂`, using the pump fields of `config`.
    pub fn combine(&self, config: &CouplerConfig) -> BiphotonState {
        let (s1, s2) = config.sources();
        let y: Fields = core::array::from_fn(|i| self.waveguide1[i] * s1 + self.waveguide2[i] * s2);
        fields_to_state(&y)
    }
}

/// Step count for one frequency: at least `steps`, raised so the source
/// phase and the supermode beating advance by at most
/// [`MAX_PHASE_PER_STEP`] per step.
pub fn resolved_steps(
    config: &CouplerConfig,
    dispersion: &DispersionModel,
    profile: &InhomogeneityProfile,
    omega: f64,
    steps: usize,
) -> usize {
    let phase = SourcePhase::new(config, dispersion, profile, omega);
    let rate = phase.max_rate() + 2.0 * config.coupling;
    let needed = math::ceil(rate * config.length / MAX_PHASE_PER_STEP);
    if needed.is_finite() && needed > steps as f64 {
        needed as usize
    } else {
        steps
    }
}

/// Unit-pump responses at one frequency, with the step count from
/// [`resolved_steps`].
pub fn integrate_pump_basis(
    config: &CouplerConfig,
    dispersion: &DispersionModel,
    profile: &InhomogeneityProfile,
    omega: f64,
    steps: usize,
) -> Result<PumpResponse> {
    config.validate()?;
    dispersion.validate()?;
    check_steps(steps)?;
    let steps = resolved_steps(config, dispersion, profile, omega, steps);
    let phase = SourcePhase::new(config, dispersion, profile, omega);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let ([r1, r2], _, _) = converged(
        [(one, zero), (zero, one)],
        config,
        &phase,
        steps,
        GENERATION_FLOOR * config.length,
    )?;
    Ok(PumpResponse {
        waveguide1: r1,
        waveguide2: r2,
    })
}

/// Uniform signal-frequency grid of `points` values centred on `center` and
/// spanning `center ± half_span`.
pub fn symmetric_grid(center: f64, half_span: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::Grid("grid needs at least one point"));
    }
    if points > 1 && !(half_span > 0.0 && half_span.is_finite()) {
        return Err(Error::Grid("half span must be finite and > 0"));
    }
    if points == 1 {
        return Ok(alloc::vec![center]);
    }
    let mid = (points - 1) as f64 / 2.0;
    let spacing = 2.0 * half_span / (points - 1) as f64;
    Ok((0..points).map(|j| center + (j as f64 - mid) * spacing).collect())
}

/// Checks that `grid` is strictly increasing and mirror-symmetric about
/// `center`, so that `2·center − ω` is also a grid point.
pub fn validate_grid(grid: &[f64], center: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("grid needs at least one point"));
    }
    if !grid.iter().all(|w| w.is_finite()) || !center.is_finite() {
        return Err(Error::Grid("grid values must be finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("grid must be strictly increasing"));
    }
    let min_spacing = grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let tol = if min_spacing.is_finite() {
        (1e-9 * min_spacing).max(8.0 * f64::EPSILON * center.abs())
    } else {
        8.0 * f64::EPSILON * center.abs().max(1.0)
    };
    let n = grid.len();
    for j in 0..n.div_ceil(2) {
        if (grid[j] + grid[n - 1 - j] - 2.0 * center).abs() > tol {
            return Err(Error::Grid("grid is not symmetric about its center frequency"));
        }
    }
    Ok(())
}

/// One waveguide-basis state per signal frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    center: f64,
    frequencies: Vec<f64>,
    states: Vec<BiphotonState>,
}

impl SpectralState {
    pub fn new(center: f64, frequencies: Vec<f64>, states: Vec<BiphotonState>) -> Result<Self> {
        validate_grid(&frequencies, center)?;
        if frequencies.len() != states.len() {
            return Err(Error::Grid("one state per frequency is required"));
        }
        Ok(Self {
            center,
            frequencies,
            states,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn states(&self) -> &[BiphotonState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Unit-pump responses on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPumpResponse {
    center: f64,
    frequencies: Vec<f64>,
    responses: Vec<PumpResponse>,
}

impl SpectralPumpResponse {
    pub fn new(center: f64, frequencies: Vec<f64>, responses: Vec<PumpResponse>) -> Result<Self> {
        validate_grid(&frequencies, center)?;
        if frequencies.len() != responses.len() {
            return Err(Error::Grid("one response per frequency is required"));
        }
        Ok(Self {
            center,
            frequencies,
            responses,
        })
    }

    /// The spectral state for the pump fields in `config`.
    pub fn combine(&self, config: &CouplerConfig) -> SpectralState {
        SpectralState {
            center: self.center,
            frequencies: self.frequencies.clone(),
            states: self.responses.iter().map(|r| r.combine(config)).collect(),
        }
    }
}

/// Unit-pump responses for every grid frequency (sequential).
pub fn spectral_pump_response(
    config: &CouplerConfig,
    dispersion: &DispersionModel,
    profile: &InhomogeneityProfile,
    grid: &[f64],
    steps: usize,
) -> Result<SpectralPumpResponse> {
    validate_grid(grid, dispersion.center)?;
    let responses = grid
        .iter()
        .map(|&w| integrate_pump_basis(config, dispersion, profile, w, steps))
        .collect::<Result<Vec<_>>>()?;
    SpectralPumpResponse::new(dispersion.center, grid.to_vec(), responses)
}

/// Integrates every grid frequency (sequential). `steps` is a floor that is
/// raised per frequency by [`resolved_steps`].
pub fn integrate_spectrum(
    config: &CouplerConfig,
    dispersion: &DispersionModel,
    profile: &InhomogeneityProfile,
    grid: &[f64],
    steps: usize,
) -> Result<SpectralState> {
    validate_grid(grid, dispersion.center)?;
    let states = grid
        .iter()
        .map(|&w| {
            let n = resolved_steps(config, dispersion, profile, w, steps);
            integrate(config, dispersion, profile, w, n)
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralState::new(dispersion.center, grid.to_vec(), states)
}
