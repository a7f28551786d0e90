//! Entanglement and overlap measures for two-qubit spatial states.

use nalgebra::Matrix4;

use crate::density::{hermitian_eigen, DensityMatrix, EIGENVALUE_FLOOR};
use crate::state::{Basis, BiphotonState};
use crate::{math, Result, C64};

/// `σ_y ⊗ σ_y` in the basis `11, 12, 21, 22`.
fn spin_flip() -> Matrix4<C64> {
    let one = C64::new(1.0, 0.0);
    let mut m = Matrix4::zeros();
    m[(0, 3)] = -one;
    m[(1, 2)] = one;
    m[(2, 1)] = one;
    m[(3, 0)] = -one;
    m
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
///
/// The `λᵢ` are the decreasing square roots of the eigenvalues of
/// `ρ·(σy⊗σy)·ρ*·(σy⊗σy)`, evaluated through the Hermitian matrix
/// `√ρ ρ̃ √ρ` that has the same spectrum. Eigenvalues below `1e-10` are
/// treated as zero before taking roots.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    rho.check_physical()?;
    let flip = spin_flip();
    let tilde = flip * rho.matrix().conjugate() * flip;
    let root = rho.sqrt_psd();
    let r = root * tilde * root;
    let mut lambdas = hermitian_eigen(&r)
        .values
        .map(|v| if v < EIGENVALUE_FLOOR { 0.0 } else { math::sqrt(v) });
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Closed form for pure states: `2 |Ψ11 Ψ22 − Ψ12 Ψ21|`.
pub fn concurrence_pure(state: &BiphotonState) -> Result<f64> {
    state.require_basis(Basis::Waveguide)?;
    state.require_normalized()?;
    let a = state.amplitudes();
    Ok(2.0 * (a[0][0] * a[1][1] - a[0][1] * a[1][0]).norm())
}

/// Fidelity with a pure target, `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(rho: &DensityMatrix, target: &BiphotonState) -> Result<f64> {
    rho.check_physical()?;
    target.require_basis(Basis::Waveguide)?;
    target.require_normalized()?;
    Ok(rho.expectation(&target.as_vector()).re)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` between two density matrices.
/// Eigenvalues of the inner product below `1e-10` count as zero.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.check_physical()?;
    sigma.check_physical()?;
    let root = rho.sqrt_psd();
    let inner = root * sigma.matrix() * root;
    let trace: f64 = hermitian_eigen(&inner)
        .values
        .iter()
        .map(|&v| if v < EIGENVALUE_FLOOR { 0.0 } else { math::sqrt(v) })
        .sum();
    Ok((trace * trace).min(1.0))
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> Result<f64> {
    rho.check_physical()?;
    Ok(rho.matrix().iter().map(|z| z.norm_sqr()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub concurrence: f64,
    pub purity: f64,
    pub fidelity_vs_target: Option<f64>,
}

impl MetricsReport {
    pub fn evaluate(rho: &DensityMatrix, target: Option<&BiphotonState>) -> Result<Self> {
        Ok(Self {
            concurrence: concurrence(rho)?,
            purity: purity(rho)?,
            fidelity_vs_target: target.map(|t| fidelity(rho, t)).transpose()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::pure_density_matrix;
    use crate::Error;
    use core::f64::consts::FRAC_1_SQRT_2 as H;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> BiphotonState {
        BiphotonState::waveguide(c(0.0), c(H), c(H), c(0.0))
    }

    fn noon() -> BiphotonState {
        BiphotonState::waveguide(c(H), c(0.0), c(0.0), c(-H))
    }

    fn basis(i: usize) -> BiphotonState {
        let mut v = [c(0.0); 4];
        v[i] = c(1.0);
        BiphotonState::from_vector(v)
    }

    #[test]
    fn bell_state_is_maximally_entangled() {
        let rho = pure_density_matrix(&bell()).unwrap();
        assert!((concurrence(&rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_zero_concurrence() {
        let rho = pure_density_matrix(&basis(0)).unwrap();
        assert!(concurrence(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn classical_mixture_of_bunched_pairs_is_separable() {
        // λ = {1/2, 1/2, 0, 0} → C = 0
        let rho = pure_density_matrix(&basis(0))
            .unwrap()
            .scaled(0.5)
            .add_scaled(&pure_density_matrix(&basis(3)).unwrap(), 0.5);
        assert!(concurrence(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn pure_closed_form_examples() {
        let half = c(0.5);
        let product = BiphotonState::waveguide(half, half, half, half);
        assert!(concurrence_pure(&product).unwrap() < 1e-15);

        let s = BiphotonState::waveguide(c(0.9f64.sqrt()), c(0.0), c(0.0), c(0.1f64.sqrt()));
        let cp = concurrence_pure(&s).unwrap();
        assert!((cp - 0.6).abs() < 1e-12);
        let cw = concurrence(&pure_density_matrix(&s).unwrap()).unwrap();
        assert!((cw - 0.6).abs() < 1e-9);
    }

    #[test]
    fn maximally_entangled_family() {
        for k in 0..16 {
            let phi = k as f64 * core::f64::consts::PI / 8.0 - core::f64::consts::PI;
            let (s, co) = (math::sin(phi / 2.0), (phi / 2.0).cos());
            let st = BiphotonState::waveguide(c(s), c(co), c(co), c(-s)).normalize().unwrap();
            assert!((concurrence_pure(&st).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_examples() {
        let rho = pure_density_matrix(&bell()).unwrap();
        assert!((fidelity(&rho, &bell()).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&rho, &noon()).unwrap().abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed();
        assert!((fidelity(&mixed, &noon()).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn state_fidelity_reduces_to_overlap_for_pure_states() {
        let mix = pure_density_matrix(&noon())
            .unwrap()
            .scaled(0.7)
            .add_scaled(&DensityMatrix::maximally_mixed(), 0.3);
        let pure = pure_density_matrix(&noon()).unwrap();
        let overlap = fidelity(&mix, &noon()).unwrap();
        assert!((state_fidelity(&mix, &pure).unwrap() - overlap).abs() < 1e-9);
        assert!((state_fidelity(&pure, &mix).unwrap() - overlap).abs() < 1e-9);
        assert!((state_fidelity(&mix, &mix).unwrap() - 1.0).abs() < 1e-9);
        // commuting diagonal states: (Σ √(p q))²
        let a = DensityMatrix::from_rows(core::array::from_fn(|i| {
            core::array::from_fn(|j| c(if i == j { [0.4, 0.3, 0.2, 0.1][i] } else { 0.0 }))
        }));
        let b = DensityMatrix::maximally_mixed();
        let expected: f64 = [0.4f64, 0.3, 0.2, 0.1].iter().map(|p| (p * 0.25).sqrt()).sum();
        assert!((state_fidelity(&a, &b).unwrap() - expected * expected).abs() < 1e-12);
    }

    #[test]
    fn purity_examples() {
        let rho = pure_density_matrix(&noon()).unwrap();
        assert!((purity(&rho).unwrap() - 1.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::maximally_mixed()).unwrap() - 0.25).abs() < 1e-15);
        let mix = rho.scaled(0.5).add_scaled(&pure_density_matrix(&bell()).unwrap(), 0.5);
        assert!((purity(&mix).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_physical_input_is_rejected() {
        let bad = DensityMatrix::from_rows([
            [c(0.6), c(0.0), c(0.0), c(0.0)],
            [c(0.0), c(0.6), c(0.0), c(0.0)],
            [c(0.0), c(0.0), c(-0.2), c(0.0)],
            [c(0.0), c(0.0), c(0.0), c(0.0)],
        ]);
        assert!(matches!(concurrence(&bad), Err(Error::NonPhysical { .. })));
        assert!(matches!(purity(&bad), Err(Error::NonPhysical { .. })));
        let unnormalized = DensityMatrix::maximally_mixed().scaled(2.0);
        assert!(matches!(
            fidelity(&unnormalized, &bell()),
            Err(Error::NonPhysical { .. })
        ));
    }

    #[test]
    fn report_collects_all_metrics() {
        let rho = pure_density_matrix(&noon()).unwrap();
        let r = MetricsReport::evaluate(&rho, Some(&noon())).unwrap();
        assert!((r.concurrence - 1.0).abs() < 1e-12);
        assert!((r.purity - 1.0).abs() < 1e-12);
        assert!((r.fidelity_vs_target.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(MetricsReport::evaluate(&rho, None).unwrap().fidelity_vs_target, None);
    }
}
