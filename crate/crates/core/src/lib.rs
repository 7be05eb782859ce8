//! Canonical decomposition of two-qubit gates and the range of output
//! concurrence they can reach from pure inputs of a given concurrence.

pub mod canonical;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod oracle;
pub mod power;
pub mod qubit_algebra;

pub use canonical::{
    canonical_gate, decompose, eigen_phases, nearest_kronecker_factor, reconstruct,
    CanonicalDecomposition, EigenPhases, WeylCoordinates,
};
pub use entanglement::{
    apply_gate, concurrence, sample_state_with_concurrence, to_magic_coefficients,
    MagicCoefficients, PureState,
};
pub use error::{Error, Result};
pub use qubit_algebra::{Mat2, Mat4};
