//! Shared numerical tolerances.
//!
//! Every threshold used by property checks and acceptance runs lives here so
//! that test suites and the harness agree on one set of numbers.

/// Algebraic identities that hold exactly in real arithmetic (objectivity,
/// constant-determinant constructions).
pub const IDENTITY: f64 = 1e-10;

/// Agreement between two independent closed-form routes to the same envelope.
pub const ORACLE: f64 = 1e-12;

/// Relative agreement of analytic gradients with central finite differences.
pub const GRADIENT_REL: f64 = 1e-5;

/// Step used by central finite differences of densities.
pub const FD_STEP: f64 = 1e-6;

/// Distance from a nonsmooth set below which analytic gradients are replaced
/// by finite differences in the FEM assembly.
pub const NONSMOOTH_BAND: f64 = 1e-8;

/// Slack allowed in chord inequalities when sampling rank-one convexity.
pub const CHORD_SLACK: f64 = 1e-9;

/// Slack on grid-box membership tests.
pub const GRID_SLACK: f64 = 1e-12;

/// Determinants at or below this value count as leaving `GL⁺(2)` on lattice lines.
pub const DET_POSITIVE: f64 = 1e-12;

/// Minimum nodewise decrease that counts as a lamination improvement.
pub const IMPROVEMENT: f64 = 1e-13;

/// Default early-stop threshold on the maximum nodewise decrease per sweep.
pub const EARLY_STOP: f64 = 1e-12;

/// Rank-one checks on recorded splits (`|det(F₂ − F₁)|`).
pub const RANK_ONE: f64 = 1e-12;
