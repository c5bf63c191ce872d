use rayon::prelude::*;

use crate::energy::{fd_gradient, EnergyDensity};
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::tolerances::{FD_STEP, NONSMOOTH_BAND};

use super::mesh::{DisplacementField, QuadMesh};

/// Reference node signs of the counter-clockwise element.
const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// 2×2 Gauss points on `[−1, 1]²`.
pub fn gauss_points() -> [[f64; 2]; 4] {
    let g = 1.0 / 3f64.sqrt();
    [[-g, -g], [g, -g], [g, g], [-g, g]]
}

/// Physical shape-function gradients `∇N_a` at each Gauss point of an
/// element of width `h`.
pub fn shape_gradients(h: f64) -> [[[f64; 2]; 4]; 4] {
    let mut out = [[[0.0; 2]; 4]; 4];
    for (q, p) in gauss_points().iter().enumerate() {
        for (a, c) in CORNERS.iter().enumerate() {
            let dxi = c[0] * (1.0 + c[1] * p[1]) / 4.0;
            let deta = c[1] * (1.0 + c[0] * p[0]) / 4.0;
            out[q][a] = [dxi * 2.0 / h, deta * 2.0 / h];
        }
    }
    out
}

/// `∇φ` at every Gauss point of element `e`.
pub fn element_gradients(
    mesh: &QuadMesh,
    field: &DisplacementField,
    f0: &Mat2,
    dn: &[[[f64; 2]; 4]; 4],
    e: usize,
) -> [Mat2; 4] {
    let nodes = mesh.elements[e];
    let mut out = [*f0; 4];
    for (q, g) in out.iter_mut().enumerate() {
        for (a, &node) in nodes.iter().enumerate() {
            let t = field.theta[node];
            *g += Mat2::outer(t, dn[q][a]);
        }
    }
    out
}

fn density_gradient<W: EnergyDensity + ?Sized>(w: &W, f: &Mat2) -> Mat2 {
    if !w.near_nonsmooth(f, NONSMOOTH_BAND) {
        if let Some(g) = w.gradient(f) {
            return g;
        }
    }
    fd_gradient(w, f, FD_STEP)
}

/// `I(φ) = ∫_Ω W(∇φ)` by 2×2 Gauss quadrature.
pub fn assemble_energy_only<W: EnergyDensity + ?Sized>(
    mesh: &QuadMesh,
    field: &DisplacementField,
    f0: &Mat2,
    w: &W,
) -> Result<f64> {
    let dn = shape_gradients(mesh.h());
    let weight = (mesh.h() / 2.0).powi(2);
    let per_element: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            element_gradients(mesh, field, f0, &dn, e)
                .iter()
                .map(|g| weight * w.value(g))
                .sum()
        })
        .collect();
    sum_checked(&per_element)
}

fn sum_checked(per_element: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (element, v) in per_element.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteEnergy { element });
        }
        total += v;
    }
    Ok(total)
}

/// Energy and its gradient with respect to every nodal `θ`; boundary entries
/// are zero.
///
/// Elements are evaluated in parallel and scattered in element order, so the
/// result does not depend on the thread count.
pub fn assemble_energy<W: EnergyDensity + ?Sized>(
    mesh: &QuadMesh,
    field: &DisplacementField,
    f0: &Mat2,
    w: &W,
) -> Result<(f64, Vec<[f64; 2]>)> {
    let dn = shape_gradients(mesh.h());
    let weight = (mesh.h() / 2.0).powi(2);
    let per_element: Vec<(f64, [[f64; 2]; 4])> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let mut energy = 0.0;
            let mut local = [[0.0; 2]; 4];
            for (q, g) in element_gradients(mesh, field, f0, &dn, e).iter().enumerate() {
                energy += weight * w.value(g);
                let p = density_gradient(w, g);
                for (a, l) in local.iter_mut().enumerate() {
                    let v = p.apply(dn[q][a]);
                    l[0] += weight * v[0];
                    l[1] += weight * v[1];
                }
            }
            (energy, local)
        })
        .collect();
    let energies: Vec<f64> = per_element.iter().map(|(v, _)| *v).collect();
    let total = sum_checked(&energies)?;
    let mut grad = vec![[0.0; 2]; mesh.num_nodes()];
    for (e, (_, local)) in per_element.iter().enumerate() {
        for (a, &node) in mesh.elements[e].iter().enumerate() {
            grad[node][0] += local[a][0];
            grad[node][1] += local[a][1];
        }
    }
    for (g, &b) in grad.iter_mut().zip(&mesh.boundary) {
        if b {
            *g = [0.0; 2];
        }
    }
    Ok((total, grad))
}
