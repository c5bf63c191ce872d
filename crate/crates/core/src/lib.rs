//! Planar relaxation toolkit: Biot-type energy densities, their analytic
//! envelopes, lattice rank-one convexification with laminate extraction, and
//! a direct finite-element energy minimizer.

pub mod convexify;
pub mod energy;
pub mod error;
pub mod fem;
pub mod mat2;
pub mod roc;
pub mod tolerances;

pub use energy::EnergyDensity;
pub use error::{Error, Result};
pub use mat2::{singular_values, Mat2, SingularPair};
