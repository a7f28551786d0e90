//! Single-state report and recognition of the special output states.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use biphoton_core::analytic::solve_waveguide;
use biphoton_core::metrics::concurrence_pure;
use biphoton_core::{BiphotonState, CouplerConfig, MapPoint, C64};
use serde::Serialize;

use crate::error::AppResult;

/// Distance from a signature that still counts as a match.
pub const SIGNATURE_TOLERANCE: f64 = 1e-3;
/// Dominance ratio above which a state counts as steered into one waveguide.
pub const STEERING_DOMINANCE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    /// `(|12⟩ + |21⟩)/√2`: one photon in each waveguide.
    BellPhiPlus,
    /// `(|11⟩ − |22⟩)/√2`: both photons together, in either waveguide.
    NoonPsiMinus,
    Factorizable,
    /// Most bunched pairs leave through one waveguide.
    SteeringDominant,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Signature::BellPhiPlus => "Bell Phi+ (one photon per waveguide)",
            Signature::NoonPsiMinus => "N00N Psi- (bunched)",
            Signature::Factorizable => "factorizable",
            Signature::SteeringDominant => "steering-dominant",
        })
    }
}

fn overlap(state: &BiphotonState, target: [f64; 4]) -> f64 {
    let v = state.as_vector();
    v.iter().zip(target).map(|(a, t)| a * t).sum::<C64>().norm_sqr()
}

pub fn signatures(state: &BiphotonState, point: &MapPoint) -> Vec<Signature> {
    let h = FRAC_1_SQRT_2;
    let mut out = Vec::new();
    if overlap(state, [0.0, h, h, 0.0]) >= 1.0 - SIGNATURE_TOLERANCE {
        out.push(Signature::BellPhiPlus);
    }
    if overlap(state, [h, 0.0, 0.0, -h]) >= 1.0 - SIGNATURE_TOLERANCE {
        out.push(Signature::NoonPsiMinus);
    }
    if point.concurrence <= SIGNATURE_TOLERANCE {
        out.push(Signature::Factorizable);
    }
    if point.dominance_ratio() >= STEERING_DOMINANCE && point.p11 + point.p22 >= 0.5 {
        out.push(Signature::SteeringDominant);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct StateReport {
    pub delta_phi_rad: f64,
    pub delta_beta_over_c: f64,
    pub coupling_length: f64,
    /// `[re, im]` per waveguide pair, normalized.
    pub amplitudes: BTreeMap<&'static str, [f64; 2]>,
    pub probabilities: BTreeMap<&'static str, f64>,
    pub phase11_rel_rad: f64,
    pub phase12_rel_rad: f64,
    pub concurrence: f64,
    pub dominance_ratio: f64,
    pub max_single_waveguide_pair_probability: f64,
    pub signatures: Vec<Signature>,
}

pub fn state_report(base: &CouplerConfig, delta_phi: f64, delta_beta_over_c: f64) -> AppResult<StateReport> {
    let cfg = base.with_pump_phase(delta_phi).with_mismatch_over_c(delta_beta_over_c);
    let state = solve_waveguide(&cfg)?;
    let point = MapPoint::from_state(&state)?;
    let g = state.gauge_fixed(biphoton_core::analytic::PHASE_FLOOR);
    let labels = ["11", "12", "21", "22"];
    let v = g.as_vector();
    let p = state.probabilities();
    Ok(StateReport {
        delta_phi_rad: delta_phi,
        delta_beta_over_c,
        coupling_length: cfg.coupling_length(),
        amplitudes: labels.iter().zip(v).map(|(&l, a)| (l, [a.re, a.im])).collect(),
        probabilities: labels
            .iter()
            .zip([p[0][0], p[0][1], p[1][0], p[1][1]])
            .map(|(&l, x)| (l, x))
            .collect(),
        phase11_rel_rad: point.phase11_rel,
        phase12_rel_rad: point.phase12_rel,
        concurrence: concurrence_pure(&state)?,
        dominance_ratio: point.dominance_ratio(),
        max_single_waveguide_pair_probability: point.p11.max(point.p22),
        signatures: signatures(&state, &point),
    })
}

impl fmt::Display for StateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "delta_phi = {} rad, delta_beta/c = {}, Lc = {}",
            self.delta_phi_rad, self.delta_beta_over_c, self.coupling_length
        )?;
        for (label, [re, im]) in &self.amplitudes {
            let p = self.probabilities[label];
            writeln!(f, "  psi{label} = {re:+.6} {im:+.6}i   p{label} = {p:.6}")?;
        }
        writeln!(f, "  phase11 - phase22 = {:.6} rad", self.phase11_rel_rad)?;
        writeln!(f, "  phase12 - phase22 = {:.6} rad", self.phase12_rel_rad)?;
        writeln!(f, "  concurrence = {:.9}", self.concurrence)?;
        writeln!(f, "  dominance ratio = {:.9}", self.dominance_ratio)?;
        writeln!(
            f,
            "  max single-waveguide pair probability = {:.9}",
            self.max_single_waveguide_pair_probability
        )?;
        if self.signatures.is_empty() {
            write!(f, "  signature: none")
        } else {
            let names: Vec<String> = self.signatures.iter().map(|s| s.to_string()).collect();
            write!(f, "  signature: {}", names.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ideal() -> CouplerConfig {
        CouplerConfig::normalized(33.0, FRAC_PI_2)
    }

    #[test]
    fn special_points() {
        let r = state_report(&ideal(), 0.0, 0.0).unwrap();
        assert_eq!(r.signatures, vec![Signature::BellPhiPlus]);
        let r = state_report(&ideal(), PI, 1.7).unwrap();
        assert!(r.signatures.contains(&Signature::NoonPsiMinus), "{r}");
        let r = state_report(&ideal(), 0.0, 2.0).unwrap();
        assert_eq!(r.signatures, vec![Signature::Factorizable]);
        let r = state_report(&ideal(), -0.53 * PI, -5.0).unwrap();
        assert_eq!(r.signatures, vec![Signature::SteeringDominant], "{r}");
    }

    #[test]
    fn device_defaults_recognize_bell_and_noon() {
        let d = CouplerConfig::device();
        assert!(state_report(&d, 0.0, 0.0)
            .unwrap()
            .signatures
            .contains(&Signature::BellPhiPlus));
        assert!(state_report(&d, PI, -3.0)
            .unwrap()
            .signatures
            .contains(&Signature::NoonPsiMinus));
    }
}
