use crate::state::Basis;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("expected a state in the {expected:?} basis, got {found:?}")]
    BasisMismatch { expected: Basis, found: Basis },

    /// The state has zero norm, i.e. no photon pairs were generated.
    #[error("degenerate state: {0}")]
    Degenerate(&'static str),

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: &'static str },

    #[error("position z = {z} lies outside the sample [0, {length}]")]
    OutOfDomain { z: f64, length: f64 },

    #[error(
        "integration did not converge: step doubling from {steps} steps changed the result by {relative_change:e} (relative)"
    )]
    NotConverged { steps: usize, relative_change: f64 },

    #[error("frequency grid: {0}")]
    Grid(&'static str),

    #[error("density matrix is not physical: {reason} (value {value:e})")]
    NonPhysical { reason: &'static str, value: f64 },

    #[error("measurement set is not tomographically complete (rank {rank} < 16)")]
    IncompleteMeasurementSet { rank: usize },
}
