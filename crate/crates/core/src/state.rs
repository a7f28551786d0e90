//! Two-photon spatial amplitudes and the waveguide ↔ eigenmode transform.
//!
//! A [`BiphotonState`] stores `amp[l][m]`, the amplitude for the signal photon
//! in mode `l` and the idler in mode `m`. In the waveguide basis index 0 is
//! waveguide 1 and index 1 is waveguide 2. In the eigenmode basis index 0 is
//! the symmetric supermode (`k = 0`) and index 1 the antisymmetric one
//! (`k = π`).
//!
//! The transform between the two is
//!
//! ```text
//! Ψn[l][m] = ½ Σ_{kl, km ∈ {0, π}} Ψk[kl][km] · exp(i kl l) · exp(i km m)
//! ```
//!
//! with `l, m ∈ {1, 2}`, so `k = π` contributes `(−1)^l`. The factor ½ makes
//! the transform unitary.

use core::f64::consts::FRAC_1_SQRT_2;

use crate::{math, Error, Result, C64};

/// Tolerance on `|norm − 1|` for operations that require a normalized state.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Waveguide,
    Eigenmode,
}

/// Single-photon transform: rows are waveguides 1, 2; columns are `k = 0, π`.
const MODE_TO_WAVEGUIDE: [[f64; 2]; 2] = [[FRAC_1_SQRT_2, -FRAC_1_SQRT_2], [FRAC_1_SQRT_2, FRAC_1_SQRT_2]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiphotonState {
    amp: [[C64; 2]; 2],
    basis: Basis,
}

impl BiphotonState {
    pub const fn new(amp: [[C64; 2]; 2], basis: Basis) -> Self {
        Self { amp, basis }
    }

    pub const fn zero(basis: Basis) -> Self {
        let z = C64::new(0.0, 0.0);
        Self::new([[z, z], [z, z]], basis)
    }

    /// Waveguide-basis state from `Ψ11, Ψ12, Ψ21, Ψ22`.
    pub const fn waveguide(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Self::new([[a11, a12], [a21, a22]], Basis::Waveguide)
    }

    /// Eigenmode-basis state from `Ψ(0,0), Ψ(0,π), Ψ(π,0), Ψ(π,π)`.
    pub const fn eigenmode(a00: C64, a0p: C64, ap0: C64, app: C64) -> Self {
        Self::new([[a00, a0p], [ap0, app]], Basis::Eigenmode)
    }

    /// Waveguide-basis state from a vector ordered `11, 12, 21, 22`.
    pub const fn from_vector(v: [C64; 4]) -> Self {
        Self::waveguide(v[0], v[1], v[2], v[3])
    }

    pub const fn basis(&self) -> Basis {
        self.basis
    }

    /// Raw amplitude array, `amp[l][m]` with zero-based indices.
    pub const fn amplitudes(&self) -> &[[C64; 2]; 2] {
        &self.amp
    }

    /// Amplitude for mode labels `l, m ∈ {1, 2}`.
    ///
    /// # Panics
    /// If a label is not 1 or 2.
    pub fn amp(&self, l: usize, m: usize) -> C64 {
        assert!((1..=2).contains(&l) && (1..=2).contains(&m), "mode labels are 1 or 2");
        self.amp[l - 1][m - 1]
    }

    /// Amplitudes flattened in the order `11, 12, 21, 22`.
    pub fn as_vector(&self) -> [C64; 4] {
        [self.amp[0][0], self.amp[0][1], self.amp[1][0], self.amp[1][1]]
    }

    /// `Σ |amp|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().flatten().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sqr())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm_sqr() })
        }
    }

    pub(crate) fn require_basis(&self, expected: Basis) -> Result<()> {
        if self.basis == expected {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                expected,
                found: self.basis,
            })
        }
    }

    /// `|amp[0][1] − amp[1][0]| ≤ tol`: signal/idler exchange symmetry.
    pub fn is_exchange_symmetric(&self, tol: f64) -> bool {
        (self.amp[0][1] - self.amp[1][0]).norm() <= tol
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut amp = self.amp;
        amp.iter_mut().flatten().for_each(|a| *a *= factor);
        Self::new(amp, self.basis)
    }

    /// Scales the state to unit norm, keeping relative phases.
    ///
    /// Fails with [`Error::Degenerate`] for the zero state.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Degenerate("state has zero or non-finite norm"));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// Transform an eigenmode-basis state into the waveguide basis.
    pub fn to_waveguide(&self) -> Result<Self> {
        self.require_basis(Basis::Eigenmode)?;
        Ok(Self::new(
            apply_both(&self.amp, |l, k| MODE_TO_WAVEGUIDE[l][k]),
            Basis::Waveguide,
        ))
    }

    /// Transform a waveguide-basis state into the eigenmode basis.
    pub fn to_eigenmode(&self) -> Result<Self> {
        self.require_basis(Basis::Waveguide)?;
        // The single-photon matrix is real orthogonal, so the inverse is its transpose.
        Ok(Self::new(
            apply_both(&self.amp, |k, l| MODE_TO_WAVEGUIDE[l][k]),
            Basis::Eigenmode,
        ))
    }

    /// Removes the global phase: `amp[1][1]` (Ψ22) is made real and
    /// non-negative when its magnitude exceeds `floor`, otherwise `amp[0][0]`.
    /// States with both below `floor` are returned unchanged.
    pub fn gauge_fixed(&self, floor: f64) -> Self {
        let reference = [self.amp[1][1], self.amp[0][0]].into_iter().find(|a| a.norm() > floor);
        match reference {
            Some(r) => self.scale(r.conj() / r.norm()),
            None => *self,
        }
    }

    /// Probabilities `|amp|²` in the same layout as the amplitudes.
    pub fn probabilities(&self) -> [[f64; 2]; 2] {
        let a = &self.amp;
        [
            [a[0][0].norm_sqr(), a[0][1].norm_sqr()],
            [a[1][0].norm_sqr(), a[1][1].norm_sqr()],
        ]
    }
}

/// `out[i][j] = Σ_{a,b} u(i,a) u(j,b) amp[a][b]`.
///
/// The cross terms are added as a pair so that an exactly symmetric input
/// gives an exactly symmetric output.
fn apply_both(amp: &[[C64; 2]; 2], u: impl Fn(usize, usize) -> f64) -> [[C64; 2]; 2] {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let term = |a: usize, b: usize| amp[a][b] * (u(i, a) * u(j, b));
            term(0, 0) + term(1, 1) + (term(0, 1) + term(1, 0))
        })
    })
}

/// Eigenmode → waveguide transform.
pub fn eigenmode_to_waveguide(state: &BiphotonState) -> Result<BiphotonState> {
    state.to_waveguide()
}

/// Waveguide → eigenmode transform, the exact inverse of [`eigenmode_to_waveguide`].
pub fn waveguide_to_eigenmode(state: &BiphotonState) -> Result<BiphotonState> {
    state.to_eigenmode()
}

pub fn normalize(state: &BiphotonState) -> Result<BiphotonState> {
    state.normalize()
}
