//! Simulated tomography of a generated state.

use std::f64::consts::{FRAC_PI_2, PI};

use biphoton_core::analytic::solve_waveguide;
use biphoton_core::density::pure_density_matrix;
use biphoton_core::filter::reduced_density_matrix;
use biphoton_core::metrics::{concurrence, fidelity, purity};
use biphoton_core::propagation::spectral_pump_response;
use biphoton_core::tomography::{
    bootstrap_fidelity, linear_inversion, mle_reconstruct, simulate_counts, BootstrapSummary, LinearInversion,
    MleOptions, MleResult,
};
use biphoton_core::{BiphotonState, CountRecord, CouplerConfig, DensityMatrix, MeasurementSet, Noise};
use serde::Serialize;

use crate::config::Resolved;
use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Noon,
    Bell,
    Factorizable,
    Steering,
}

impl Target {
    /// `(Δφ, Δβ/c)` that produces the target.
    pub fn coordinates(self) -> (f64, f64) {
        match self {
            Target::Noon => (PI, 0.0),
            Target::Bell => (0.0, 0.0),
            Target::Factorizable => (0.0, 2.0),
            Target::Steering => (0.53 * PI, 5.0),
        }
    }

    /// The target on an ideal coupler: `Lc = π/2`, equal pumps.
    pub fn ideal_state(self, coupling: f64) -> AppResult<BiphotonState> {
        let (p, b) = self.coordinates();
        let cfg = CouplerConfig::normalized(coupling, FRAC_PI_2)
            .with_pump_phase(p)
            .with_mismatch_over_c(b);
        Ok(solve_waveguide(&cfg)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseArg {
    None,
    Poisson,
}

impl From<NoiseArg> for Noise {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::None => Noise::None,
            NoiseArg::Poisson => Noise::Poisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationPath {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy)]
pub struct TomographyRequest {
    pub target: Target,
    pub counts: f64,
    pub noise: NoiseArg,
    pub path: GenerationPath,
    pub seed: u64,
    pub bootstrap: usize,
}

/// Density matrix of the configured device at the target coordinates.
pub fn generate(model: &Resolved, target: Target, path: GenerationPath) -> AppResult<DensityMatrix> {
    let (p, b) = target.coordinates();
    let cfg = model.coupler.with_pump_phase(p).with_mismatch_over_c(b);
    match path {
        GenerationPath::Analytic => Ok(pure_density_matrix(&solve_waveguide(&cfg)?)?),
        GenerationPath::Numeric => {
            let resp = spectral_pump_response(
                &cfg,
                &model.dispersion,
                &model.profile,
                &model.spectrum,
                model.min_steps,
            )?;
            Ok(reduced_density_matrix(&resp.combine(&cfg), &model.filter)?)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StateMetrics {
    pub concurrence: f64,
    pub purity: f64,
    pub fidelity_vs_target: f64,
}

impl StateMetrics {
    fn of(rho: &DensityMatrix, target: &BiphotonState) -> AppResult<Self> {
        Ok(Self {
            concurrence: concurrence(rho)?,
            purity: purity(rho)?,
            fidelity_vs_target: fidelity(rho, target)?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearMetrics {
    pub physical: bool,
    pub min_eigenvalue: f64,
    pub residual: f64,
    /// Absent when the inverted matrix is not positive semidefinite.
    pub metrics: Option<StateMetrics>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MleMetrics {
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    #[serde(flatten)]
    pub metrics: StateMetrics,
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapMetrics {
    pub resamples: usize,
    pub fidelity_mean: f64,
    pub fidelity_std_dev: f64,
}

impl From<BootstrapSummary> for BootstrapMetrics {
    fn from(b: BootstrapSummary) -> Self {
        Self {
            resamples: b.resamples,
            fidelity_mean: b.mean,
            fidelity_std_dev: b.std_dev,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TomographyMetrics {
    pub target: Target,
    pub delta_phi_rad: f64,
    pub delta_beta_over_c: f64,
    pub path: GenerationPath,
    pub noise: NoiseArg,
    pub counts_scale: f64,
    pub seed: u64,
    pub generated: StateMetrics,
    pub linear_inversion: LinearMetrics,
    pub mle: MleMetrics,
    pub bootstrap: Option<BootstrapMetrics>,
}

pub struct TomographyRun {
    pub generated: DensityMatrix,
    pub record: CountRecord,
    pub linear: LinearInversion,
    pub mle: MleResult,
    pub metrics: TomographyMetrics,
}

pub fn run(model: &Resolved, req: &TomographyRequest) -> AppResult<TomographyRun> {
    if !(req.counts.is_finite() && req.counts > 0.0) {
        return Err(AppError::config("--counts must be > 0"));
    }
    if req.bootstrap == 1 {
        return Err(AppError::config("--bootstrap needs at least 2 resamples"));
    }
    let target = req.target.ideal_state(model.coupler.coupling)?;
    let generated = generate(model, req.target, req.path)?;
    let set = MeasurementSet::standard();
    let record = simulate_counts(&generated, &set, req.counts, req.noise.into(), req.seed)?;
    let linear = linear_inversion(&record, &set)?;
    let options = MleOptions::default();
    let mle = mle_reconstruct(&record, &set, &options)?;
    let bootstrap = if req.bootstrap >= 2 {
        let seed = req.seed.wrapping_add(1);
        Some(bootstrap_fidelity(&record, &set, &target, req.bootstrap, seed, &options)?.into())
    } else {
        None
    };
    let (p, b) = req.target.coordinates();
    let metrics = TomographyMetrics {
        target: req.target,
        delta_phi_rad: p,
        delta_beta_over_c: b,
        path: req.path,
        noise: req.noise,
        counts_scale: req.counts,
        seed: req.seed,
        generated: StateMetrics::of(&generated, &target)?,
        linear_inversion: LinearMetrics {
            physical: linear.physical,
            min_eigenvalue: linear.min_eigenvalue,
            residual: linear.residual,
            metrics: if linear.physical {
                Some(StateMetrics::of(&linear.rho, &target)?)
            } else {
                None
            },
        },
        mle: MleMetrics {
            converged: mle.converged,
            iterations: mle.iterations,
            log_likelihood: mle.log_likelihood,
            metrics: StateMetrics::of(&mle.rho, &target)?,
        },
        bootstrap,
    };
    Ok(TomographyRun {
        generated,
        record,
        linear,
        mle,
        metrics,
    })
}
