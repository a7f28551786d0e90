//! Closed-form solution of the coupled-mode equations for a homogeneous
//! coupler at degenerate frequencies, and parameter-space sweeps over the pump
//! phase difference `Δφ` and the normalized mismatch `Δβ/c`.
//!
//! In eigenmode space the solution is
//!
//! ```text
//! Ψ(0,0) / Ψ(π,π) =  (γL/4) [A₁ + A₂e^{iΔφ}] exp[iLc(Δβ/c ± 2)/2] sinc[Lc(Δβ/c ∓ 2)/(2π)]
//! Ψ(0,π) = Ψ(π,0) = −(γL/4) [A₁ − A₂e^{iΔφ}] exp[iLc(Δβ/c)/2]     sinc[Lc(Δβ/c)/(2π)]
//! ```
//!
//! with `sinc(x) = sin(πx)/x`. An even pump (`Δφ = 0`) only feeds the
//! even-even and odd-odd pairs; an odd pump (`Δφ = π`) only feeds the mixed
//! pairs, which become bunched N00N states in the waveguide basis.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::config::CouplerConfig;
use crate::density::DensityMatrix;
use crate::metrics::{concurrence, concurrence_pure};
use crate::state::BiphotonState;
use crate::{math, Error, Result, C64};

/// Mismatch change per kelvin of sample temperature, in units of `c`.
pub const MISMATCH_OVER_C_PER_KELVIN: f64 = 25.0;

/// Normalized amplitudes (or ρ elements) below this carry no phase.
pub const PHASE_FLOOR: f64 = 1e-12;

/// `sin(πx)/x`, continued to `π` at `x = 0`.
///
/// This is deliberately not the normalized sinc `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        PI
    } else {
        math::sin(PI * x) / x
    }
}

/// Eigenmode amplitudes at the output facet.
pub fn solve_eigenmode(config: &CouplerConfig) -> Result<BiphotonState> {
    config.validate()?;
    let lc = config.coupling_length();
    let b = config.mismatch_over_c();
    let prefactor = config.gamma * config.length / 4.0;
    let pump2 = C64::from_polar(config.pump2, config.pump_phase);
    let p_even = pump2 + config.pump1;
    let p_odd = -pump2 + config.pump1;

    let even_even = p_even * C64::from_polar(prefactor, lc * (b + 2.0) / 2.0) * sinc(lc * (b - 2.0) / (2.0 * PI));
    let odd_odd = p_even * C64::from_polar(prefactor, lc * (b - 2.0) / 2.0) * sinc(lc * (b + 2.0) / (2.0 * PI));
    let mixed = -p_odd * C64::from_polar(prefactor, lc * b / 2.0) * sinc(lc * b / (2.0 * PI));

    Ok(BiphotonState::eigenmode(even_even, mixed, mixed, odd_odd))
}

/// Unnormalized waveguide amplitudes, `eigenmode_to_waveguide(solve_eigenmode)`.
pub fn solve_waveguide_raw(config: &CouplerConfig) -> Result<BiphotonState> {
    solve_eigenmode(config)?.to_waveguide()
}

/// Normalized waveguide-basis state. Fails with [`Error::Degenerate`] when no
/// pairs are generated (see [`CouplerConfig::normalize_output`]).
pub fn solve_waveguide(config: &CouplerConfig) -> Result<BiphotonState> {
    config.normalize_output(&solve_waveguide_raw(config)?)
}

/// Linear map from a sample temperature change to `Δβ/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureTuning {
    pub mismatch_over_c_per_kelvin: f64,
}

impl Default for TemperatureTuning {
    fn default() -> Self {
        Self {
            mismatch_over_c_per_kelvin: MISMATCH_OVER_C_PER_KELVIN,
        }
    }
}

impl TemperatureTuning {
    pub fn to_mismatch_over_c(&self, delta_t: f64) -> f64 {
        self.mismatch_over_c_per_kelvin * delta_t
    }
}

/// `Δβ/c` for a temperature change in °C, with the device calibration of
/// 2.5 c per 0.1 °C.
pub fn temperature_to_mismatch(delta_t: f64) -> f64 {
    TemperatureTuning::default().to_mismatch_over_c(delta_t)
}

/// Axes of a parameter map.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    delta_phi: Vec<f64>,
    delta_beta_over_c: Vec<f64>,
}

impl SweepGrid {
    pub fn new(delta_phi: Vec<f64>, delta_beta_over_c: Vec<f64>) -> Result<Self> {
        if delta_phi.is_empty() || delta_beta_over_c.is_empty() {
            return Err(Error::InvalidParameter {
                field: "grid",
                reason: "both axes need at least one value",
            });
        }
        if !delta_phi.iter().chain(&delta_beta_over_c).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "grid",
                reason: "axis values must be finite",
            });
        }
        Ok(Self {
            delta_phi,
            delta_beta_over_c,
        })
    }

    /// Uniform axes including both end points.
    pub fn uniform(phi: (f64, f64, usize), beta: (f64, f64, usize)) -> Result<Self> {
        Self::new(linspace(phi.0, phi.1, phi.2), linspace(beta.0, beta.1, beta.2))
    }

    pub fn delta_phi(&self) -> &[f64] {
        &self.delta_phi
    }

    pub fn delta_beta_over_c(&self) -> &[f64] {
        &self.delta_beta_over_c
    }

    pub fn len(&self) -> usize {
        self.delta_phi.len() * self.delta_beta_over_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid coordinates in storage order: `Δφ` outer, `Δβ/c` inner.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.delta_phi
            .iter()
            .flat_map(move |&p| self.delta_beta_over_c.iter().map(move |&b| (p, b)))
    }
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            // two-sided weights: symmetric ranges give exact zeros and
            // exactly mirrored values
            let m = (n - 1) as f64;
            (0..n)
                .map(|i| start * ((n - 1 - i) as f64 / m) + stop * (i as f64 / m))
                .collect()
        }
    }
}

/// Correlation data at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPoint {
    pub p11: f64,
    /// `p12 = p21`.
    pub p12: f64,
    pub p22: f64,
    /// Phase of Ψ11 relative to Ψ22 (rad); NaN where undefined.
    pub phase11_rel: f64,
    /// Phase of Ψ12 relative to Ψ22 (rad); NaN where undefined.
    pub phase12_rel: f64,
    pub concurrence: f64,
}

impl MapPoint {
    /// From a normalized pure waveguide state.
    pub fn from_state(state: &BiphotonState) -> Result<Self> {
        let concurrence = concurrence_pure(state)?;
        let g = state.gauge_fixed(PHASE_FLOOR);
        let p = g.probabilities();
        let a22 = g.amp(2, 2);
        let rel = |a: C64| {
            if a22.norm() > PHASE_FLOOR && a.norm() > PHASE_FLOOR {
                (a / a22).arg()
            } else {
                f64::NAN
            }
        };
        Ok(Self {
            p11: p[0][0],
            p12: 0.5 * (p[0][1] + p[1][0]),
            p22: p[1][1],
            phase11_rel: rel(g.amp(1, 1)),
            phase12_rel: rel(g.amp(1, 2)),
            concurrence,
        })
    }

    /// From a trace-normalized density matrix. The relative phases are the
    /// arguments of the coherences `ρ(11,22)` and `ρ(12,22)`, which equal the
    /// amplitude phase differences for pure states.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let concurrence = concurrence(rho)?;
        let d = rho.diagonal();
        let phase = |z: C64| if z.norm() > PHASE_FLOOR { z.arg() } else { f64::NAN };
        Ok(Self {
            p11: d[0],
            p12: 0.5 * (d[1] + d[2]),
            p22: d[3],
            phase11_rel: phase(rho.get(0, 3)),
            phase12_rel: phase(rho.get(1, 3)),
            concurrence,
        })
    }

    /// `p11 + 2·p12 + p22`.
    pub fn total_probability(&self) -> f64 {
        self.p11 + 2.0 * self.p12 + self.p22
    }

    /// Share of the dominant waveguide in the bunched probability,
    /// `max(p11, p22) / (p11 + p22)`.
    pub fn dominance_ratio(&self) -> f64 {
        let diag = self.p11 + self.p22;
        if diag > 0.0 {
            self.p11.max(self.p22) / diag
        } else {
            f64::NAN
        }
    }
}

/// Per-point quantities stored in a [`CorrelationMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    P11,
    P12,
    P22,
    Phase11Rel,
    Phase12Rel,
    Concurrence,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::P11,
        Quantity::P12,
        Quantity::P22,
        Quantity::Phase11Rel,
        Quantity::Phase12Rel,
        Quantity::Concurrence,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Quantity::P11 => "p11",
            Quantity::P12 => "p12",
            Quantity::P22 => "p22",
            Quantity::Phase11Rel => "phase11_rel",
            Quantity::Phase12Rel => "phase12_rel",
            Quantity::Concurrence => "concurrence",
        }
    }

    pub fn of(self, point: &MapPoint) -> f64 {
        match self {
            Quantity::P11 => point.p11,
            Quantity::P12 => point.p12,
            Quantity::P22 => point.p22,
            Quantity::Phase11Rel => point.phase11_rel,
            Quantity::Phase12Rel => point.phase12_rel,
            Quantity::Concurrence => point.concurrence,
        }
    }
}

/// Sweep results. `None` marks grid points where no pairs are generated.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap {
    grid: SweepGrid,
    points: Vec<Option<MapPoint>>,
}

impl CorrelationMap {
    /// `points` must be in [`SweepGrid::points`] order.
    pub fn from_points(grid: SweepGrid, points: Vec<Option<MapPoint>>) -> Result<Self> {
        if points.len() != grid.len() {
            return Err(Error::InvalidParameter {
                field: "points",
                reason: "length does not match the grid",
            });
        }
        Ok(Self { grid, points })
    }

    pub fn grid(&self) -> &SweepGrid {
        &self.grid
    }

    pub fn points(&self) -> &[Option<MapPoint>] {
        &self.points
    }

    /// Point at axis indices `(i_phi, i_beta)`.
    pub fn get(&self, i_phi: usize, i_beta: usize) -> Option<&MapPoint> {
        let n = self.grid.delta_beta_over_c.len();
        self.points.get(i_phi * n + i_beta)?.as_ref()
    }

    /// `(Δφ, Δβ/c, value)` rows in grid order; null points yield NaN.
    pub fn rows(&self, q: Quantity) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.grid
            .points()
            .zip(&self.points)
            .map(move |((p, b), pt)| (p, b, pt.as_ref().map_or(f64::NAN, |pt| q.of(pt))))
    }
}

/// One analytic grid point: overrides `Δφ` and `Δβ/c` in `base`.
pub fn sweep_point(base: &CouplerConfig, delta_phi: f64, delta_beta_over_c: f64) -> Result<Option<MapPoint>> {
    let cfg = base.with_pump_phase(delta_phi).with_mismatch_over_c(delta_beta_over_c);
    match solve_waveguide(&cfg) {
        Ok(state) => MapPoint::from_state(&state).map(Some),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Sequential analytic sweep.
pub fn sweep(base: &CouplerConfig, grid: &SweepGrid) -> Result<CorrelationMap> {
    base.validate()?;
    let points = grid
        .points()
        .map(|(p, b)| sweep_point(base, p, b))
        .collect::<Result<Vec<_>>>()?;
    CorrelationMap::from_points(grid.clone(), points)
}
