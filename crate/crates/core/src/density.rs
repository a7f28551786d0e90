//! Two-qubit density matrices over the spatial basis `11, 12, 21, 22`.

use nalgebra::{Matrix4, Vector4};

use crate::state::{Basis, BiphotonState};
use crate::{math, Error, Result, C64};

/// Eigenvalues below this are treated as numerical noise around zero.
pub const EIGENVALUE_FLOOR: f64 = 1e-10;
/// Eigenvalues below `-PSD_TOLERANCE` mark a matrix as non-physical.
pub const PSD_TOLERANCE: f64 = 1e-8;
/// Allowed `|Tr ρ − 1|` for a physical matrix.
pub const TRACE_TOLERANCE: f64 = 1e-10;

/// A Hermitian 4×4 matrix. Construction hermitizes the input, so
/// `rho[i][j] == conj(rho[j][i])` holds exactly. Trace normalization and
/// positivity are not enforced here; see [`DensityMatrix::check_physical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Matrix4<C64>,
}

/// Eigenvalues in ascending order with matching eigenvectors as columns.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    pub values: [f64; 4],
    pub vectors: Matrix4<C64>,
}

impl DensityMatrix {
    /// Takes the Hermitian part `(m + m†)/2`.
    pub fn from_matrix(m: Matrix4<C64>) -> Self {
        Self {
            m: (m + m.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    pub fn from_rows(rows: [[C64; 4]; 4]) -> Self {
        Self::from_matrix(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    /// `|ψ⟩⟨ψ|` for an arbitrary (not necessarily normalized) vector.
    pub fn outer(v: &[C64; 4]) -> Self {
        let m = Matrix4::from_fn(|i, j| v[i] * v[j].conj());
        Self { m }
    }

    /// `I/4`.
    pub fn maximally_mixed() -> Self {
        Self {
            m: Matrix4::identity() * C64::new(0.25, 0.0),
        }
    }

    pub fn zeros() -> Self {
        Self { m: Matrix4::zeros() }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    /// Element `(i, j)` with zero-based indices in the order `11, 12, 21, 22`.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn diagonal(&self) -> [f64; 4] {
        core::array::from_fn(|i| self.m[(i, i)].re)
    }

    /// `self + weight · other`.
    pub fn add_scaled(&self, other: &Self, weight: f64) -> Self {
        Self {
            m: self.m + other.m * C64::new(weight, 0.0),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            m: self.m * C64::new(factor, 0.0),
        }
    }

    /// Divides by the trace.
    pub fn trace_normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t.is_nan() || t <= 0.0 || !t.is_finite() {
            return Err(Error::Degenerate("density matrix has non-positive trace"));
        }
        Ok(self.scaled(1.0 / t))
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&self.m)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        self.eigen().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Checks trace 1 and positivity within tolerance.
    pub fn check_physical(&self) -> Result<()> {
        let t = self.trace();
        if !t.is_finite() || (t - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::NonPhysical {
                reason: "trace differs from 1",
                value: t,
            });
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(Error::NonPhysical {
                reason: "negative eigenvalue",
                value: min,
            });
        }
        Ok(())
    }

    pub fn is_physical(&self) -> bool {
        self.check_physical().is_ok()
    }

    /// Clips negative eigenvalues to zero and renormalizes the trace.
    pub fn project_physical(&self) -> Result<Self> {
        let e = self.eigen();
        let clipped = Vector4::from_fn(|i, _| C64::new(e.values[i].max(0.0), 0.0));
        let m = e.vectors * Matrix4::from_diagonal(&clipped) * e.vectors.adjoint();
        Self::from_matrix(m).trace_normalized()
    }

    /// Matrix square root with eigenvalues below [`EIGENVALUE_FLOOR`] set to zero.
    pub(crate) fn sqrt_psd(&self) -> Matrix4<C64> {
        let e = self.eigen();
        let roots = Vector4::from_fn(|i, _| {
            let v = e.values[i];
            C64::new(if v < EIGENVALUE_FLOOR { 0.0 } else { math::sqrt(v) }, 0.0)
        });
        e.vectors * Matrix4::from_diagonal(&roots) * e.vectors.adjoint()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, v: &[C64; 4]) -> C64 {
        let psi = Vector4::from_column_slice(v);
        (psi.adjoint() * self.m * psi)[(0, 0)]
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.m - other.m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Eigendecomposition of a Hermitian 4×4 matrix (only the Hermitian part is
/// used), sorted by ascending eigenvalue.
pub fn hermitian_eigen(m: &Matrix4<C64>) -> HermitianEigen {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.map(|k| eig.eigenvalues[k]);
    let vectors = Matrix4::from_fn(|i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// `ρ = |ψ⟩⟨ψ|` for a normalized waveguide-basis state.
pub fn pure_density_matrix(state: &BiphotonState) -> Result<DensityMatrix> {
    state.require_basis(Basis::Waveguide)?;
    state.require_normalized()?;
    Ok(DensityMatrix::outer(&state.as_vector()))
}
