//! Simulated two-qubit state tomography.
//!
//! Waveguide 1 maps to the first pole of each qubit and waveguide 2 to the
//! second. The single-qubit states are, in order,
//!
//! | index | label | vector        |
//! |-------|-------|---------------|
//! | 0     | `1`   | `(1, 0)`      |
//! | 1     | `2`   | `(0, 1)`      |
//! | 2     | `D`   | `(1, 1)/√2`   |
//! | 3     | `R`   | `(1, i)/√2`   |
//!
//! and projector `4a + b` is `s_a ⊗ s_b` (signal first). Projectors `0, 1, 4, 5`
//! are the four basis states `11, 12, 21, 22`.

use alloc::vec::Vec;

use nalgebra::{Matrix4, SMatrix, SVector, Vector4};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::density::DensityMatrix;
use crate::metrics::fidelity;
use crate::state::BiphotonState;
use crate::{math, Error, Result, C64};

pub const PROJECTORS: usize = 16;
pub const SINGLE_QUBIT_LABELS: [&str; 4] = ["1", "2", "D", "R"];
/// Singular values below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-10;

type Design = SMatrix<f64, PROJECTORS, PROJECTORS>;
type Column = SVector<f64, PROJECTORS>;

fn single_qubit_states() -> [[C64; 2]; 4] {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    [
        [C64::new(1.0, 0.0), z],
        [z, C64::new(1.0, 0.0)],
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::new(h, 0.0), C64::new(0.0, h)],
    ]
}

/// Orthonormal Hermitian basis of the 4×4 operators under `Tr(A†B)`.
fn operator_basis() -> [Matrix4<C64>; PROJECTORS] {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut out = [Matrix4::zeros(); PROJECTORS];
    let mut k = 0;
    for i in 0..4 {
        out[k][(i, i)] = C64::new(1.0, 0.0);
        k += 1;
    }
    for i in 0..4 {
        for j in i + 1..4 {
            out[k][(i, j)] = C64::new(h, 0.0);
            out[k][(j, i)] = C64::new(h, 0.0);
            k += 1;
            out[k][(i, j)] = C64::new(0.0, -h);
            out[k][(j, i)] = C64::new(0.0, h);
            k += 1;
        }
    }
    out
}

/// An ordered list of 16 normalized rank-1 projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    projectors: [[C64; 4]; PROJECTORS],
}

impl MeasurementSet {
    /// All 16 products of the single-qubit states `1, 2, D, R`.
    pub fn standard() -> Self {
        let s = single_qubit_states();
        let projectors = core::array::from_fn(|k| {
            let (a, b) = (k / 4, k % 4);
            core::array::from_fn(|v| s[a][v / 2] * s[b][v % 2])
        });
        Self { projectors }
    }

    /// Each vector must have unit norm within `1e-12`.
    pub fn new(projectors: [[C64; 4]; PROJECTORS]) -> Result<Self> {
        for p in &projectors {
            let n: f64 = p.iter().map(|z| z.norm_sqr()).sum();
            if (math::sqrt(n) - 1.0).abs() > 1e-12 || n.is_nan() {
                return Err(Error::NotNormalized { norm: math::sqrt(n) });
            }
        }
        Ok(Self { projectors })
    }

    pub fn projectors(&self) -> &[[C64; 4]; PROJECTORS] {
        &self.projectors
    }

    /// Label such as `"1D"` for projector `k` of the standard set.
    pub fn standard_label(k: usize) -> (&'static str, &'static str) {
        (SINGLE_QUBIT_LABELS[k / 4], SINGLE_QUBIT_LABELS[k % 4])
    }

    /// `M[k][a] = ⟨P_k|G_a|P_k⟩` over the orthonormal operator basis.
    fn design(&self) -> Design {
        let basis = operator_basis();
        Design::from_fn(|k, a| {
            let p = Vector4::from_column_slice(&self.projectors[k]);
            (p.adjoint() * basis[a] * p)[(0, 0)].re
        })
    }

    /// Rank of the map `ρ ↦ (⟨P_k|ρ|P_k⟩)_k`; 16 means complete.
    pub fn rank(&self) -> usize {
        let sv = self.design().singular_values();
        let max = sv.max();
        sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
    }

    pub fn check_complete(&self) -> Result<()> {
        match self.rank() {
            PROJECTORS => Ok(()),
            rank => Err(Error::IncompleteMeasurementSet { rank }),
        }
    }

    /// `⟨P_k|ρ|P_k⟩` for every projector.
    pub fn probabilities(&self, rho: &DensityMatrix) -> [f64; PROJECTORS] {
        self.projectors.map(|p| rho.expectation(&p).re)
    }
}

impl Default for MeasurementSet {
    fn default() -> Self {
        Self::standard()
    }
}

/// Coincidence counts for the 16 projectors and the scale `N` they were
/// generated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord {
    counts: [f64; PROJECTORS],
    total_scale: f64,
}

impl CountRecord {
    pub fn new(counts: [f64; PROJECTORS], total_scale: f64) -> Result<Self> {
        if !counts.iter().all(|c| c.is_finite() && *c >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "counts",
                reason: "counts must be finite and non-negative",
            });
        }
        if !(total_scale.is_finite() && total_scale > 0.0) {
            return Err(Error::InvalidParameter {
                field: "total_scale",
                reason: "must be finite and > 0",
            });
        }
        Ok(Self { counts, total_scale })
    }

    pub fn counts(&self) -> &[f64; PROJECTORS] {
        &self.counts
    }

    pub fn total_scale(&self) -> f64 {
        self.total_scale
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Noise {
    #[default]
    None,
    Poisson,
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> Result<f64> {
    if mean <= 0.0 {
        return Ok(0.0);
    }
    let d = Poisson::new(mean).map_err(|_| Error::InvalidParameter {
        field: "counts",
        reason: "expected count out of range for Poisson sampling",
    })?;
    Ok(d.sample(rng))
}

/// Expected counts `N ⟨P|ρ|P⟩`, optionally Poisson-sampled from a
/// `ChaCha8` stream seeded with `seed`.
pub fn simulate_counts(
    rho: &DensityMatrix,
    set: &MeasurementSet,
    n: f64,
    noise: Noise,
    seed: u64,
) -> Result<CountRecord> {
    rho.check_physical()?;
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidParameter {
            field: "total_counts",
            reason: "must be finite and > 0",
        });
    }
    let expected = set.probabilities(rho).map(|p| n * p.max(0.0));
    let counts = match noise {
        Noise::None => expected,
        Noise::Poisson => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = [0.0; PROJECTORS];
            for (o, &m) in out.iter_mut().zip(&expected) {
                *o = poisson(&mut rng, m)?;
            }
            out
        }
    };
    CountRecord::new(counts, n)
}

/// Output of [`linear_inversion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearInversion {
    /// Hermitian, unit trace, not necessarily positive.
    pub rho: DensityMatrix,
    pub min_eigenvalue: f64,
    /// `min_eigenvalue ≥ −1e-8`.
    pub physical: bool,
    /// `‖M x − n‖ / ‖n‖` of the least-squares solve.
    pub residual: f64,
}

/// Least-squares inversion of `n_k = Tr(P_k ρ)` (up to scale).
pub fn linear_inversion(record: &CountRecord, set: &MeasurementSet) -> Result<LinearInversion> {
    set.check_complete()?;
    let m = set.design();
    let b = Column::from_column_slice(record.counts());
    let x = m
        .svd(true, true)
        .solve(&b, 0.0)
        .map_err(|_| Error::Degenerate("singular measurement matrix"))?;
    let bn = b.norm();
    let residual = if bn > 0.0 { (m * x - b).norm() / bn } else { 0.0 };
    let basis = operator_basis();
    let sum = basis
        .iter()
        .zip(x.iter())
        .fold(Matrix4::<C64>::zeros(), |acc, (g, &xa)| acc + g * C64::new(xa, 0.0));
    let rho = DensityMatrix::from_matrix(sum).trace_normalized()?;
    let min_eigenvalue = rho.min_eigenvalue();
    Ok(LinearInversion {
        rho,
        min_eigenvalue,
        physical: min_eigenvalue >= -crate::density::PSD_TOLERANCE,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MleInit {
    /// Linear inversion projected to the positive cone and mixed with a
    /// little of `I/4`.
    #[default]
    LinearInversion,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub init: MleInit,
    pub max_iterations: usize,
    /// Improvement of the Poisson log-likelihood counted as a stall.
    pub tolerance: f64,
    /// Consecutive stalled iterations that end the search.
    pub patience: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            init: MleInit::LinearInversion,
            max_iterations: 100_000,
            tolerance: 1e-10,
            patience: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleResult {
    /// `T†T / Tr(T†T)`; positive semidefinite with unit trace.
    pub rho: DensityMatrix,
    pub converged: bool,
    pub iterations: usize,
    /// `Σ n_k ln μ_k − μ_k` up to a constant, with `μ_k` in counts.
    pub log_likelihood: f64,
}

/// Upper-triangular `T` packed as 4 real diagonal entries followed by the
/// real and imaginary parts of the 6 entries above the diagonal.
type Params = SVector<f64, PROJECTORS>;

const UPPER: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn unpack(p: &Params) -> Matrix4<C64> {
    let mut t = Matrix4::zeros();
    for i in 0..4 {
        t[(i, i)] = C64::new(p[i], 0.0);
    }
    for (n, &(i, j)) in UPPER.iter().enumerate() {
        t[(i, j)] = C64::new(p[4 + 2 * n], p[5 + 2 * n]);
    }
    t
}

fn pack(t: &Matrix4<C64>) -> Params {
    let mut p = Params::zeros();
    for i in 0..4 {
        p[i] = t[(i, i)].re;
    }
    for (n, &(i, j)) in UPPER.iter().enumerate() {
        p[4 + 2 * n] = t[(i, j)].re;
        p[5 + 2 * n] = t[(i, j)].im;
    }
    p
}

/// Poisson log-likelihood evaluated on count fractions (so `T` stays of
/// order one) and scaled back to counts by `total`.
struct Likelihood<'a> {
    fractions: [f64; PROJECTORS],
    total: f64,
    projectors: &'a [[C64; 4]; PROJECTORS],
}

impl Likelihood<'_> {
    fn value(&self, p: &Params) -> f64 {
        let t = unpack(p);
        let mut total = 0.0;
        for (f, proj) in self.fractions.iter().zip(self.projectors) {
            let v = t * Vector4::from_column_slice(proj);
            let mu = v.norm_squared();
            if *f > 0.0 {
                if mu <= 0.0 || mu.is_nan() {
                    return f64::NEG_INFINITY;
                }
                total += f * math::ln(mu);
            }
            total -= mu;
        }
        self.total * total
    }

    fn gradient(&self, p: &Params) -> Params {
        let t = unpack(p);
        let mut g = Matrix4::<C64>::zeros();
        for (f, proj) in self.fractions.iter().zip(self.projectors) {
            let pv = Vector4::from_column_slice(proj);
            let v = t * pv;
            let mu = v.norm_squared();
            let w = self.total * if *f > 0.0 { f / mu - 1.0 } else { -1.0 };
            for i in 0..4 {
                for j in i..4 {
                    let z = v[i].conj() * pv[j];
                    // d/dRe and d/dIm of μ, stored as re and im parts
                    g[(i, j)] += C64::new(2.0 * z.re, -2.0 * z.im) * w;
                }
            }
        }
        pack(&g)
    }
}

fn factor_of(rho: &DensityMatrix) -> Result<Matrix4<C64>> {
    let chol = rho
        .matrix()
        .cholesky()
        .ok_or(Error::Degenerate("initial density matrix is not positive definite"))?;
    Ok(chol.l().adjoint())
}

fn initial_factor(record: &CountRecord, set: &MeasurementSet, init: MleInit) -> Result<Matrix4<C64>> {
    const MIXING: f64 = 1e-3;
    let rho = match init {
        MleInit::Identity => DensityMatrix::maximally_mixed(),
        MleInit::LinearInversion => linear_inversion(record, set)?
            .rho
            .project_physical()?
            .scaled(1.0 - MIXING)
            .add_scaled(&DensityMatrix::maximally_mixed(), MIXING),
    };
    let t = factor_of(&rho)?;
    // scale so that Σ μ_k matches Σ f_k = 1
    let predicted: f64 = set.probabilities(&rho).iter().sum();
    Ok(t * C64::new(1.0 / math::sqrt(predicted), 0.0))
}

fn rho_of(p: &Params) -> Result<DensityMatrix> {
    let t = unpack(p);
    DensityMatrix::from_matrix(t.adjoint() * t).trace_normalized()
}

/// Maximum-likelihood reconstruction with `ρ = T†T / Tr(T†T)`.
///
/// Gradient ascent with Barzilai–Borwein step lengths and Armijo
/// backtracking on the Poisson log-likelihood. Running out of iterations is
/// reported through [`MleResult::converged`], not as an error.
pub fn mle_reconstruct(record: &CountRecord, set: &MeasurementSet, options: &MleOptions) -> Result<MleResult> {
    set.check_complete()?;
    let total = record.total();
    if total <= 0.0 || total.is_nan() {
        return Err(Error::Degenerate("no counts recorded"));
    }
    let objective = Likelihood {
        fractions: record.counts().map(|c| c / total),
        total,
        projectors: set.projectors(),
    };

    let mut x = pack(&initial_factor(record, set, options.init)?);
    let mut fx = objective.value(&x);
    let mut g = objective.gradient(&x);
    let mut step = 1.0;
    let mut stalled = 0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        iterations += 1;
        let gg = g.norm_squared();
        if gg == 0.0 {
            converged = true;
            break;
        }
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = x + g * alpha;
            let ft = objective.value(&trial);
            if ft >= fx + 1e-4 * alpha * gg {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no ascent direction left at working precision
            converged = true;
            break;
        };
        let g_new = objective.gradient(&x_new);
        let s = x_new - x;
        let y = g_new - g;
        let sy = s.dot(&y);
        step = if sy < 0.0 { -s.norm_squared() / sy } else { 2.0 * alpha };
        step = step.clamp(1e-12, 1e6);

        let improvement = f_new - fx;
        x = x_new;
        fx = f_new;
        g = g_new;
        if improvement < options.tolerance {
            stalled += 1;
            if stalled >= options.patience {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    Ok(MleResult {
        rho: rho_of(&x)?,
        converged,
        iterations,
        log_likelihood: fx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub resamples: usize,
}

/// Parametric bootstrap of the MLE fidelity: each resample draws every count
/// from a Poisson distribution with the observed count as its mean.
pub fn bootstrap_fidelity(
    record: &CountRecord,
    set: &MeasurementSet,
    target: &BiphotonState,
    resamples: usize,
    seed: u64,
    options: &MleOptions,
) -> Result<BootstrapSummary> {
    if resamples < 2 {
        return Err(Error::InvalidParameter {
            field: "bootstrap",
            reason: "at least two resamples are required",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut counts = [0.0; PROJECTORS];
        for (c, &observed) in counts.iter_mut().zip(record.counts()) {
            *c = poisson(&mut rng, observed)?;
        }
        let resampled = CountRecord::new(counts, record.total_scale())?;
        let rho = mle_reconstruct(&resampled, set, options)?.rho;
        values.push(fidelity(&rho, target)?);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(BootstrapSummary {
        mean,
        std_dev: math::sqrt(var),
        resamples,
    })
}
