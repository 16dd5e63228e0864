//! Generalized Pauli constraints on natural occupation numbers of fermionic
//! states: determinant algebra, one-body reduced density matrices, constraint
//! tables and pinning analysis, structured ansatz states, and a small full-CI
//! solver for generating ground states.

pub mod ansatz;
pub mod error;
pub mod fock;
pub mod gpc;
pub mod linalg;
pub mod rdm;
pub mod sampling;
pub mod toyci;

pub use error::{Error, Result};
pub use fock::{BasisSpec, Ladder, SignedDeterminant, SlaterDeterminant, Spin};
pub use gpc::{
    builtin_table, GPCTable, GPConstraint, PinningReport, PinningStatus, PinningTolerances,
};
pub use rdm::{
    compute_1rdm, diagonalize, CIVector, NaturalOrbitalFrame, OccupationSpectrum, OneBodyRDM,
};
pub use toyci::Hamiltonian;
