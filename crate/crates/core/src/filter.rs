//! Gaussian bandpass filtering of a spectral biphoton state and the
//! frequency-traced spatial density matrix.

use nalgebra::Matrix4;

use crate::density::DensityMatrix;
use crate::propagation::{validate_grid, SpectralState};
use crate::state::Basis;
use crate::{Error, Result, C64};

/// Vacuum speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const DEFAULT_CENTER_NM: f64 = 1342.0;
pub const DEFAULT_FWHM_NM: f64 = 12.0;
/// Relative tolerance on `ω_p = 2ω₀`.
pub const PUMP_TOLERANCE: f64 = 1e-9;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Gaussian filter `F(ω) = exp(−4 ln2 (ω − ω₀)² / σ²)`; all frequencies in
/// rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    center: f64,
    fwhm: f64,
    pump: f64,
}

impl FilterSpec {
    /// Filter from angular center and FWHM; the pump is set to `2ω₀`.
    pub fn from_angular(center: f64, fwhm: f64) -> Result<Self> {
        if !(center.is_finite() && center > 0.0) {
            return Err(Error::InvalidParameter {
                field: "filter.center",
                reason: "must be finite and > 0",
            });
        }
        if !(fwhm.is_finite() && fwhm > 0.0) {
            return Err(Error::InvalidParameter {
                field: "filter.fwhm",
                reason: "must be finite and > 0",
            });
        }
        Ok(Self {
            center,
            fwhm,
            pump: 2.0 * center,
        })
    }

    /// Filter from a center wavelength and a FWHM in nm, converted with
    /// `dω = 2π c₀ dλ / λ²` at the center.
    pub fn from_wavelength_nm(center_nm: f64, fwhm_nm: f64) -> Result<Self> {
        if !(center_nm.is_finite() && center_nm > 0.0) {
            return Err(Error::InvalidParameter {
                field: "filter.center_nm",
                reason: "must be finite and > 0",
            });
        }
        if !(fwhm_nm.is_finite() && fwhm_nm > 0.0) {
            return Err(Error::InvalidParameter {
                field: "filter.fwhm_nm",
                reason: "must be finite and > 0",
            });
        }
        let lambda = center_nm * 1e-9;
        Self::from_angular(
            TWO_PI * SPEED_OF_LIGHT / lambda,
            TWO_PI * SPEED_OF_LIGHT * fwhm_nm * 1e-9 / (lambda * lambda),
        )
    }

    /// Replaces the pump frequency after checking `ω_p = 2ω₀`.
    pub fn with_pump(self, pump: f64) -> Result<Self> {
        let expected = 2.0 * self.center;
        if !pump.is_finite() || (pump - expected).abs() > PUMP_TOLERANCE * expected {
            return Err(Error::InvalidParameter {
                field: "filter.pump",
                reason: "pump frequency must equal twice the center frequency",
            });
        }
        Ok(Self { pump, ..self })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    pub fn pump(&self) -> f64 {
        self.pump
    }

    pub fn center_wavelength_nm(&self) -> f64 {
        TWO_PI * SPEED_OF_LIGHT / self.center * 1e9
    }

    /// `F(ω)`.
    pub fn response(&self, omega: f64) -> f64 {
        filter_response(self, omega)
    }

    /// Joint transmission `F(ω) F(ω_p − ω)` of a signal/idler pair.
    pub fn pair_transmission(&self, omega: f64) -> f64 {
        self.response(omega) * self.response(self.pump - omega)
    }
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self::from_wavelength_nm(DEFAULT_CENTER_NM, DEFAULT_FWHM_NM).expect("default filter is valid")
    }
}

pub fn filter_response(spec: &FilterSpec, omega: f64) -> f64 {
    let d = (omega - spec.center) / spec.fwhm;
    crate::math::exp(-4.0 * core::f64::consts::LN_2 * d * d)
}

/// Trapezoid weights for a strictly increasing grid; a single point gets 1.
fn trapezoid_weights(grid: &[f64]) -> alloc::vec::Vec<f64> {
    let n = grid.len();
    if n == 1 {
        return alloc::vec![1.0];
    }
    (0..n)
        .map(|j| {
            let lo = grid[j.saturating_sub(1)];
            let hi = grid[(j + 1).min(n - 1)];
            0.5 * (hi - lo)
        })
        .collect()
}

/// Sums `term(j)` over the grid by mirror pairs `(j, n−1−j)` so spectra
/// symmetric about the center give an order-independent result.
fn pairwise_sum<T, F>(n: usize, zero: T, term: F) -> T
where
    T: core::ops::Add<Output = T> + Copy,
    F: Fn(usize) -> T,
{
    let mut acc = zero;
    for j in 0..n / 2 {
        acc = acc + (term(j) + term(n - 1 - j));
    }
    if n % 2 == 1 {
        acc = acc + term(n / 2);
    }
    acc
}

fn quadrature_weights(spectral: &SpectralState, spec: &FilterSpec) -> Result<alloc::vec::Vec<f64>> {
    validate_grid(spectral.frequencies(), 0.5 * spec.pump)?;
    for s in spectral.states() {
        s.require_basis(Basis::Waveguide)?;
    }
    let grid = spectral.frequencies();
    Ok(trapezoid_weights(grid)
        .into_iter()
        .zip(grid)
        .map(|(t, &w)| t * spec.pair_transmission(w))
        .collect())
}

/// Filtered spatial correlations `Γ_lm = ∫ dω F(ω)F(ω_p − ω) |Ψ_lm(ω)|²`,
/// raw and normalized to unit sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredCorrelations {
    pub raw: [[f64; 2]; 2],
    pub normalized: [[f64; 2]; 2],
}

impl FilteredCorrelations {
    /// Normalized `Γ_lm` with 1-based indices.
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.normalized[l - 1][m - 1]
    }
}

pub fn filtered_correlations(spectral: &SpectralState, spec: &FilterSpec) -> Result<FilteredCorrelations> {
    let weights = quadrature_weights(spectral, spec)?;
    let states = spectral.states();
    let raw: [[f64; 2]; 2] = core::array::from_fn(|l| {
        core::array::from_fn(|m| {
            pairwise_sum(states.len(), 0.0, |j| {
                weights[j] * states[j].amplitudes()[l][m].norm_sqr()
            })
        })
    });
    let total: f64 = raw.iter().flatten().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Degenerate("filtered spectrum carries no weight"));
    }
    Ok(FilteredCorrelations {
        raw,
        normalized: raw.map(|row| row.map(|g| g / total)),
    })
}

/// Filter-weighted sum of the per-frequency pure states `|Ψ(ω)⟩⟨Ψ(ω)|`,
/// normalized to unit trace.
pub fn reduced_density_matrix(spectral: &SpectralState, spec: &FilterSpec) -> Result<DensityMatrix> {
    let weights = quadrature_weights(spectral, spec)?;
    let states = spectral.states();
    let sum = pairwise_sum(states.len(), Matrix4::<C64>::zeros(), |j| {
        let v = states[j].as_vector();
        Matrix4::from_fn(|a, b| v[a] * v[b].conj() * weights[j])
    });
    let rho = DensityMatrix::from_matrix(sum);
    if !(rho.trace() > 0.0 && rho.trace().is_finite()) {
        return Err(Error::Degenerate("filtered spectrum carries no weight"));
    }
    rho.trace_normalized()
}
