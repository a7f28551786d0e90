//! Biphoton states generated by spontaneous parametric down-conversion in a
//! two-waveguide nonlinear directional coupler.
//!
//! The crate is `no_std` (with `alloc`) and contains only numerics:
//!
//! - [`state`]: two-photon amplitudes in the waveguide and eigenmode bases.
//! - [`density`]: 4×4 density matrices over the ordered basis `11, 12, 21, 22`.
//! - [`analytic`]: closed-form coupled-mode solution and parameter sweeps.
//! - [`propagation`]: RK4 integration with inhomogeneous and dispersive mismatch.
//! - [`filter`]: Gaussian spectral filtering and frequency-traced density matrices.
//! - [`metrics`]: concurrence, fidelity and purity.
//! - [`tomography`]: simulated 16-projector tomography with linear inversion and
//!   maximum-likelihood reconstruction.
//!
//! IO, configuration files, parallel drivers and the command line live in the
//! companion `biphoton` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analytic;
pub mod config;
pub mod density;
mod error;
pub mod filter;
mod math;
pub mod metrics;
pub mod propagation;
pub mod state;
pub mod tomography;

pub use analytic::{CorrelationMap, MapPoint, SweepGrid};
pub use config::CouplerConfig;
pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use filter::{FilterSpec, FilteredCorrelations};
pub use metrics::MetricsReport;
pub use propagation::{DispersionModel, InhomogeneityProfile, SpectralState};
pub use state::{Basis, BiphotonState};
pub use tomography::{CountRecord, MeasurementSet, Noise};

/// Double-precision complex number used throughout.
pub type C64 = num_complex::Complex<f64>;
