//! Numerics for multi-copy activation of genuine multipartite entanglement
//! (GME): dense density-matrix algebra, isotropic GHZ and X-form states,
//! GM concurrence and Hadamard-map thresholds, a constructive biseparable
//! decomposition of two three-qubit copies, and PPT bound-entangled
//! triangle states with their GME witness.

pub mod boundent;
pub mod error;
pub mod gme;
pub mod linalg;
pub mod separability;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, C64};
pub use states::{Partition, ProductFormState, XFormState};
