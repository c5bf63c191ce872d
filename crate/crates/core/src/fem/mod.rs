//! Direct minimization of `∫_Ω W(∇φ)` over bilinear quadrilaterals with
//! affine Dirichlet data.

pub mod assemble;
pub mod diagnostics;
pub mod export;
pub mod mesh;
pub mod solver;

pub use assemble::{assemble_energy, assemble_energy_only};
pub use diagnostics::{diagnostics, DetDiagnostics};
pub use export::{write_mesh_csv, write_mesh_vtk};
pub use mesh::{DisplacementField, QuadMesh};
pub use solver::{minimize, minimize_from, FemConfig, SolveReport, SolverOptions};
