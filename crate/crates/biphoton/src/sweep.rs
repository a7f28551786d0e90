//! Parallel drivers. Results are collected in grid order, so outputs do not
//! depend on the number of threads.

use biphoton_core::analytic::sweep_point;
use biphoton_core::filter::reduced_density_matrix;
use biphoton_core::propagation::{integrate_pump_basis, PumpResponse, SpectralPumpResponse};
use biphoton_core::{CorrelationMap, CouplerConfig, DensityMatrix, Error, MapPoint, SweepGrid};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::Resolved;
use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Analytic,
    Numeric,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Numeric => "numeric",
        }
    }
}

pub fn pool(threads: usize) -> AppResult<ThreadPool> {
    if threads == 0 {
        return Err(AppError::config("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::config(format!("thread pool: {e}")))
}

pub fn analytic_map(base: &CouplerConfig, grid: &SweepGrid, pool: &ThreadPool) -> AppResult<CorrelationMap> {
    base.validate()?;
    let coords: Vec<(f64, f64)> = grid.points().collect();
    let points = pool.install(|| {
        coords
            .par_iter()
            .map(|&(p, b)| sweep_point(base, p, b))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(CorrelationMap::from_points(grid.clone(), points)?)
}

/// Unit-pump spectral responses for each `Δβ₀/c`, integrated in parallel over
/// all (mismatch, frequency) pairs.
pub fn pump_responses(model: &Resolved, mismatches: &[f64], pool: &ThreadPool) -> AppResult<Vec<SpectralPumpResponse>> {
    let freqs = &model.spectrum;
    let jobs: Vec<(usize, f64)> = (0..mismatches.len())
        .flat_map(|i| freqs.iter().map(move |&w| (i, w)))
        .collect();
    let responses: Vec<PumpResponse> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, w)| {
                let cfg = model.coupler.with_mismatch_over_c(mismatches[i]);
                integrate_pump_basis(&cfg, &model.dispersion, &model.profile, w, model.min_steps)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    responses
        .chunks(freqs.len())
        .map(|chunk| {
            SpectralPumpResponse::new(model.dispersion.center, freqs.clone(), chunk.to_vec()).map_err(AppError::from)
        })
        .collect()
}

/// Filtered, frequency-traced state for one pump phase. `None` when nothing
/// passes the filter.
pub fn reduced_state(
    model: &Resolved,
    response: &SpectralPumpResponse,
    delta_phi: f64,
) -> AppResult<Option<DensityMatrix>> {
    let spectral = response.combine(&model.coupler.with_pump_phase(delta_phi));
    match reduced_density_matrix(&spectral, &model.filter) {
        Ok(rho) => Ok(Some(rho)),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Numeric map plus the reduced density matrix behind every point.
pub struct NumericMap {
    pub map: CorrelationMap,
    pub densities: Vec<Option<DensityMatrix>>,
}

pub fn numeric_map(model: &Resolved, pool: &ThreadPool) -> AppResult<NumericMap> {
    let grid = &model.grid;
    let responses = pump_responses(model, grid.delta_beta_over_c(), pool)?;
    let nb = grid.delta_beta_over_c().len();
    let coords: Vec<(usize, f64)> = grid
        .delta_phi()
        .iter()
        .flat_map(|&p| (0..nb).map(move |j| (j, p)))
        .collect();
    let densities = pool.install(|| {
        coords
            .par_iter()
            .map(|&(j, p)| reduced_state(model, &responses[j], p))
            .collect::<AppResult<Vec<_>>>()
    })?;
    let points = densities
        .iter()
        .map(|rho| rho.as_ref().map(MapPoint::from_density).transpose())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NumericMap {
        map: CorrelationMap::from_points(grid.clone(), points)?,
        densities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use biphoton_core::analytic::sweep;

    #[test]
    fn parallel_analytic_matches_sequential() {
        let model = RunConfig::default().resolve().unwrap();
        let seq = sweep(&model.coupler, &model.grid).unwrap();
        for threads in [1, 3] {
            let par = analytic_map(&model.coupler, &model.grid, &pool(threads).unwrap()).unwrap();
            assert_eq!(par.points().len(), seq.points().len());
            for (a, b) in par.points().iter().zip(seq.points()) {
                match (a, b) {
                    (Some(a), Some(b)) => {
                        assert_eq!(a.p11.to_bits(), b.p11.to_bits());
                        assert_eq!(a.concurrence.to_bits(), b.concurrence.to_bits());
                    }
                    (None, None) => {}
                    _ => panic!("degenerate points differ"),
                }
            }
        }
    }

    #[test]
    fn zero_threads_is_rejected() {
        assert_eq!(pool(0).unwrap_err().exit_code(), 2);
    }
}
