use crate::mat2::Mat2;

use super::assemble::{element_gradients, shape_gradients};
use super::mesh::{DisplacementField, QuadMesh};

/// Determinant statistics over all quadrature points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetDiagnostics {
    pub min_det: f64,
    pub max_det: f64,
    /// Quadrature points with `det ∇φ ≤ 0`.
    pub negative_count: usize,
    pub orientation_violating: bool,
}

pub fn diagnostics(mesh: &QuadMesh, field: &DisplacementField, f0: &Mat2) -> DetDiagnostics {
    let dn = shape_gradients(mesh.h());
    let mut min_det = f64::INFINITY;
    let mut max_det = f64::NEG_INFINITY;
    let mut negative_count = 0;
    for e in 0..mesh.num_elements() {
        for g in element_gradients(mesh, field, f0, &dn, e) {
            let d = g.det();
            min_det = min_det.min(d);
            max_det = max_det.max(d);
            if d <= 0.0 {
                negative_count += 1;
            }
        }
    }
    DetDiagnostics {
        min_det,
        max_det,
        negative_count,
        orientation_violating: negative_count > 0,
    }
}

/// Mean of `det ∇φ` over the quadrature points of each element.
pub fn element_mean_det(mesh: &QuadMesh, field: &DisplacementField, f0: &Mat2) -> Vec<f64> {
    let dn = shape_gradients(mesh.h());
    (0..mesh.num_elements())
        .map(|e| {
            element_gradients(mesh, field, f0, &dn, e)
                .iter()
                .map(|g| g.det())
                .sum::<f64>()
                / 4.0
        })
        .collect()
}
