use biphoton_core::analytic::solve_waveguide;
use biphoton_core::filter::{filtered_correlations, reduced_density_matrix};
use biphoton_core::metrics::{concurrence, purity};
use biphoton_core::propagation::{integrate_spectrum, spectral_pump_response, symmetric_grid, DEFAULT_STEPS};
use biphoton_core::{CouplerConfig, DispersionModel, FilterSpec, InhomogeneityProfile};
use core::f64::consts::PI;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `37.5 (1 − s)^10 + 15 s^10` in ascending powers of `s`.
fn edge_heated_profile() -> InhomogeneityProfile {
    let mut c = vec![0.0; 11];
    for (k, slot) in c.iter_mut().enumerate() {
        let k = k as u32;
        *slot = 37.5 * binomial(10, k) * if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    }
    c[10] += 15.0;
    InhomogeneityProfile::new(c).unwrap()
}

fn setup() -> (FilterSpec, DispersionModel, Vec<f64>) {
    let filter = FilterSpec::default();
    let c = CouplerConfig::DEVICE_COUPLING;
    let disp = DispersionModel::with_mismatch_at(filter.center(), filter.fwhm() / 2.0, 25.0 * c).unwrap();
    let grid = symmetric_grid(filter.center(), 1.5 * filter.fwhm(), 41).unwrap();
    (filter, disp, grid)
}

#[test]
fn profile_expansion() {
    let p = edge_heated_profile();
    for s in [0.0, 0.1, 0.5, 0.93, 1.0] {
        let expected = 37.5 * (1.0f64 - s).powi(10) + 15.0 * s.powi(10);
        assert!((p.value(s) - expected).abs() < 1e-9);
    }
}

#[test]
fn inhomogeneous_sample_breaks_anti_bunching() {
    let (filter, disp, grid) = setup();
    let cfg = CouplerConfig::device();
    let spec = integrate_spectrum(&cfg, &disp, &edge_heated_profile(), &grid, DEFAULT_STEPS).unwrap();
    let g = filtered_correlations(&spec, &filter).unwrap();
    let rho = reduced_density_matrix(&spec, &filter).unwrap();
    assert!(g.get(1, 1) > 0.02, "{g:?}");
    assert!(concurrence(&rho).unwrap() < 1.0 - 1e-3);
    assert!(purity(&rho).unwrap() < 1.0);
    assert!(rho.min_eigenvalue() > -1e-10);
}

#[test]
fn without_dispersion_or_inhomogeneity_the_filter_is_irrelevant() {
    let (filter, _, grid) = setup();
    let flat = DispersionModel::none(filter.center());
    let spec = integrate_spectrum(
        &CouplerConfig::device(),
        &flat,
        &InhomogeneityProfile::homogeneous(),
        &grid,
        DEFAULT_STEPS,
    )
    .unwrap();
    let g = filtered_correlations(&spec, &filter).unwrap();
    let rho = reduced_density_matrix(&spec, &filter).unwrap();
    let single = solve_waveguide(&CouplerConfig::device()).unwrap().probabilities();
    for (row, expected) in g.normalized.iter().zip(single) {
        for (x, e) in row.iter().zip(expected) {
            assert!((x - e).abs() < 1e-9, "{g:?}");
        }
    }
    assert!((concurrence(&rho).unwrap() - 1.0).abs() < 1e-6);
    assert!((purity(&rho).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn dispersion_alone_already_mixes_the_state() {
    let (filter, disp, grid) = setup();
    let spec = integrate_spectrum(
        &CouplerConfig::device(),
        &disp,
        &InhomogeneityProfile::homogeneous(),
        &grid,
        DEFAULT_STEPS,
    )
    .unwrap();
    let rho = reduced_density_matrix(&spec, &filter).unwrap();
    assert!(purity(&rho).unwrap() < 1.0 - 1e-3);
    assert!(rho.min_eigenvalue() > -1e-10);
}

#[test]
fn odd_pump_keeps_noon_correlations_through_the_filter() {
    let (filter, disp, grid) = setup();
    let profile = edge_heated_profile();
    let basis = spectral_pump_response(&CouplerConfig::device(), &disp, &profile, &grid, DEFAULT_STEPS).unwrap();
    for b in [-6.0, 0.0, 3.0] {
        let cfg = CouplerConfig::device().with_pump_phase(PI).with_mismatch_over_c(b);
        let spec = basis.combine(&cfg);
        let g = filtered_correlations(&spec, &filter).unwrap();
        assert!(g.get(1, 2) < 1e-9 && g.get(2, 1) < 1e-9);
        assert!((g.get(1, 1) - g.get(2, 2)).abs() < 1e-9);
    }
}
