//! Rank-one convexification on a lattice by iterated lamination.

pub mod directions;
pub mod grid;
pub mod io;
pub mod iterate;
pub mod laminate;
pub mod line;
pub mod microstructure;

pub use directions::{directions, DirectionSet, RankOneDirection};
pub use grid::{build_grid, GridBounds, Grid4, RocConfig, DEFAULT_MEMORY_BUDGET};
pub use iterate::{roc_iterate, IterationStats, RocResult, SplitRecord};
pub use laminate::{extract_laminates, LaminationNode, LaminationTree};
pub use line::{line_points, RankOneLine};
pub use microstructure::{reconstruct_microstructure, Microstructure};
