//! Exact partition functions of the finite Ising cylinder with
//! Brascamp-Kunz boundary rows, at zero field and at `H/kT = i*pi/2`.

pub mod closed_form;
pub mod duality;
pub mod error;
pub mod lattice;
pub mod mccoy_wu;
pub mod scaled;
pub mod thermo;
pub mod verify;
pub mod zeros;

pub use error::{BkError, Result};
pub use lattice::{Couplings, FieldMode, LatticeSpec};
pub use scaled::ScaledValue;
