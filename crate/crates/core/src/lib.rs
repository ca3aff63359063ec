//! Sample-based quantum diagonalization.
//!
//! Measured bit-strings from a (simulated) quantum circuit select a subspace
//! of Slater determinants; the molecular Hamiltonian is projected onto that
//! subspace and diagonalized classically. Configuration recovery repairs
//! noisy samples, and orbital optimization refines the basis.

pub mod determinant;
pub mod driver;
pub mod error;
pub mod integrals;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod orbopt;
pub mod recovery;
pub mod sampler;
pub mod subspace;
pub mod testing;

pub use error::{Result, SqdError};
