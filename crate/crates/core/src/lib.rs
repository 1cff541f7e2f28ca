//! Numerical engine for the three-mode atomic flux qubit.
//!
//! Energies are in units of the collision strength `U₀`; times in `ħ/U₀`.

pub mod decoherence;
pub mod error;
pub mod fock;
pub mod gates;
pub mod linalg;
pub mod model;
pub mod operator;
pub mod optim;
pub mod spectra;

pub use error::{Error, Result};
pub use fock::{FockBasis, SectorMatrix};
pub use model::{InteractionKind, ModelParams};
pub use operator::HermitianOperator;

pub use faer::c64;
