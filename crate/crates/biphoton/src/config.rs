//! JSON run configuration.
//!
//! Every physical field carries its unit in the name. Missing sections and
//! fields take the device defaults; unknown fields are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use biphoton_core::analytic::linspace;
use biphoton_core::propagation::symmetric_grid;
use biphoton_core::{CouplerConfig, DispersionModel, FilterSpec, InhomogeneityProfile, SweepGrid};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

const DEFAULT_PROFILE: &str = include_str!("../data/default_profile.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub coupler: CouplerSection,
    pub dispersion: DispersionSection,
    pub profile: ProfileSection,
    pub filter: FilterSection,
    pub spectrum: SpectrumSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplerSection {
    pub coupling_per_m: f64,
    pub length_m: f64,
    pub gamma: f64,
    pub pump1_amplitude: f64,
    pub pump2_amplitude: f64,
    /// Base pump phase; sweeps and targets override it.
    pub pump_phase_rad: f64,
    /// Base `Δβ₀/c`; sweeps and targets override it.
    pub mismatch_over_c: f64,
}

impl Default for CouplerSection {
    fn default() -> Self {
        let d = CouplerConfig::device();
        Self {
            coupling_per_m: d.coupling,
            length_m: d.length,
            gamma: d.gamma,
            pump1_amplitude: d.pump1,
            pump2_amplitude: d.pump2,
            pump_phase_rad: d.pump_phase,
            mismatch_over_c: 0.0,
        }
    }
}

/// Quadratic dispersion. An explicit curvature wins; otherwise the curvature
/// is set so that `Δβ_ω/c` reaches `mismatch_over_c_at_half_fwhm` at half a
/// filter FWHM from the center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature_s2_per_m: Option<f64>,
    pub mismatch_over_c_at_half_fwhm: f64,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self {
            curvature_s2_per_m: None,
            mismatch_over_c_at_half_fwhm: 25.0,
        }
    }
}

/// `δβ(z)/c` as ascending polynomial coefficients in `s = z/L`. Absent means
/// the bundled edge-heated profile; an empty list means a homogeneous sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients_over_c: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub filter_center_nm: f64,
    pub filter_fwhm_nm: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            filter_center_nm: biphoton_core::filter::DEFAULT_CENTER_NM,
            filter_fwhm_nm: biphoton_core::filter::DEFAULT_FWHM_NM,
        }
    }
}

/// Signal-frequency grid used by the numeric path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub points: usize,
    /// Half width of the grid in units of the filter FWHM.
    pub half_span_fwhm: f64,
    /// RK4 step floor per frequency.
    pub min_steps: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            points: 61,
            half_span_fwhm: 1.5,
            min_steps: biphoton_core::propagation::DEFAULT_STEPS,
        }
    }
}

/// Parameter map axes. Explicit value lists replace the uniform ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub delta_phi_min_rad: f64,
    pub delta_phi_max_rad: f64,
    pub delta_phi_points: usize,
    pub delta_beta_over_c_min: f64,
    pub delta_beta_over_c_max: f64,
    pub delta_beta_over_c_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_phi_values_rad: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_beta_over_c_values: Option<Vec<f64>>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            delta_phi_min_rad: -PI,
            delta_phi_max_rad: PI,
            delta_phi_points: 21,
            delta_beta_over_c_min: -8.0,
            delta_beta_over_c_max: 8.0,
            delta_beta_over_c_points: 21,
            delta_phi_values_rad: None,
            delta_beta_over_c_values: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Deserialize)]
struct BundledProfile {
    coefficients_over_c: Vec<f64>,
}

pub fn bundled_profile() -> Vec<f64> {
    let p: BundledProfile = serde_json::from_str(DEFAULT_PROFILE).expect("bundled profile parses");
    p.coefficients_over_c
}

/// Validated model objects built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub coupler: CouplerConfig,
    pub dispersion: DispersionModel,
    pub profile: InhomogeneityProfile,
    pub filter: FilterSpec,
    pub spectrum: Vec<f64>,
    pub min_steps: usize,
    pub grid: SweepGrid,
}

fn field_error(field: &str, reason: impl std::fmt::Display) -> AppError {
    AppError::config(format!("{field}: {reason}"))
}

fn finite(field: &str, v: f64) -> AppResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field_error(field, "must be finite"))
    }
}

fn positive(field: &str, v: f64) -> AppResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(field_error(field, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> AppResult<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(field_error(field, format!("must be finite and >= 0, got {v}")))
    }
}

fn axis(field: &str, values: &Option<Vec<f64>>, range: (f64, f64, usize)) -> AppResult<Vec<f64>> {
    let v = match values {
        Some(v) => {
            if v.is_empty() {
                return Err(field_error(&format!("{field}_values"), "grid is empty"));
            }
            v.clone()
        }
        None => {
            finite(&format!("{field}_min"), range.0)?;
            finite(&format!("{field}_max"), range.1)?;
            if range.2 == 0 {
                return Err(field_error(&format!("{field}_points"), "grid is empty"));
            }
            linspace(range.0, range.1, range.2)
        }
    };
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(field_error(field, format!("non-finite axis value {bad}")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn from_json(text: &str) -> AppResult<Self> {
        serde_json::from_str(text).map_err(|e| AppError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn coupler_config(&self) -> AppResult<CouplerConfig> {
        let s = &self.coupler;
        let c = positive("coupler.coupling_per_m", s.coupling_per_m)?;
        let cfg = CouplerConfig {
            coupling: c,
            length: positive("coupler.length_m", s.length_m)?,
            gamma: non_negative("coupler.gamma", s.gamma)?,
            pump1: non_negative("coupler.pump1_amplitude", s.pump1_amplitude)?,
            pump2: non_negative("coupler.pump2_amplitude", s.pump2_amplitude)?,
            pump_phase: finite("coupler.pump_phase_rad", s.pump_phase_rad)?,
            mismatch: finite("coupler.mismatch_over_c", s.mismatch_over_c)? * c,
        };
        if cfg.amplitude_scale() == 0.0 {
            return Err(field_error(
                "coupler",
                "gamma and at least one pump amplitude must be > 0",
            ));
        }
        Ok(cfg)
    }

    pub fn filter_spec(&self) -> AppResult<FilterSpec> {
        let f = &self.filter;
        let center = positive("filter.filter_center_nm", f.filter_center_nm)?;
        let fwhm = positive("filter.filter_fwhm_nm", f.filter_fwhm_nm)?;
        FilterSpec::from_wavelength_nm(center, fwhm).map_err(|e| field_error("filter", e))
    }

    pub fn sweep_grid(&self) -> AppResult<SweepGrid> {
        let s = &self.sweep;
        let phi = axis(
            "sweep.delta_phi",
            &s.delta_phi_values_rad,
            (s.delta_phi_min_rad, s.delta_phi_max_rad, s.delta_phi_points),
        )?;
        let beta = axis(
            "sweep.delta_beta_over_c",
            &s.delta_beta_over_c_values,
            (
                s.delta_beta_over_c_min,
                s.delta_beta_over_c_max,
                s.delta_beta_over_c_points,
            ),
        )?;
        SweepGrid::new(phi, beta).map_err(|e| field_error("sweep", e))
    }

    pub fn resolve(&self) -> AppResult<Resolved> {
        let coupler = self.coupler_config()?;
        let filter = self.filter_spec()?;
        let dispersion = match self.dispersion.curvature_s2_per_m {
            Some(d) => DispersionModel::new(finite("dispersion.curvature_s2_per_m", d)?, filter.center()),
            None => {
                let m = finite(
                    "dispersion.mismatch_over_c_at_half_fwhm",
                    self.dispersion.mismatch_over_c_at_half_fwhm,
                )?;
                DispersionModel::with_mismatch_at(filter.center(), filter.fwhm() / 2.0, m * coupler.coupling)
            }
        }
        .map_err(|e| field_error("dispersion", e))?;
        let coefficients = self.profile.coefficients_over_c.clone().unwrap_or_else(bundled_profile);
        let profile =
            InhomogeneityProfile::new(coefficients).map_err(|e| field_error("profile.coefficients_over_c", e))?;
        let sp = &self.spectrum;
        if sp.points == 0 {
            return Err(field_error("spectrum.points", "grid is empty"));
        }
        let half_span = positive("spectrum.half_span_fwhm", sp.half_span_fwhm)? * filter.fwhm();
        let spectrum = symmetric_grid(filter.center(), half_span, sp.points).map_err(|e| field_error("spectrum", e))?;
        if sp.min_steps < biphoton_core::propagation::MIN_STEPS {
            return Err(field_error(
                "spectrum.min_steps",
                format!("must be at least {}", biphoton_core::propagation::MIN_STEPS),
            ));
        }
        Ok(Resolved {
            coupler,
            dispersion,
            profile,
            filter,
            spectrum,
            min_steps: sp.min_steps,
            grid: self.sweep_grid()?,
        })
    }
}
