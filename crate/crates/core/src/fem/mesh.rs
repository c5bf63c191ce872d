use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// Uniform mesh of `n × n` bilinear quadrilaterals on `[−1, 1]²`.
///
/// Node `(i, j)` sits at `(−1 + 2i/n, −1 + 2j/n)` with id `j(n+1) + i`;
/// element `(i, j)` has the counter-clockwise nodes
/// `(i, j), (i+1, j), (i+1, j+1), (i, j+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadMesh {
    pub n_per_side: usize,
    pub coords: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 4]>,
    pub boundary: Vec<bool>,
}

impl QuadMesh {
    pub fn new(n_per_side: usize) -> Result<Self> {
        if n_per_side < 1 {
            return Err(Error::InvalidInput("mesh needs at least one element per side".into()));
        }
        let n = n_per_side;
        let mut coords = Vec::with_capacity((n + 1) * (n + 1));
        let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                coords.push([-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64]);
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut elements = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                elements.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Ok(QuadMesh {
            n_per_side,
            coords,
            elements,
            boundary,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Element edge length.
    pub fn h(&self) -> f64 {
        2.0 / self.n_per_side as f64
    }

    pub fn area(&self) -> f64 {
        4.0
    }

    pub fn node_id(&self, i: usize, j: usize) -> usize {
        j * (self.n_per_side + 1) + i
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&a| !self.boundary[a]).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&a| self.boundary[a]).collect()
    }

    /// Jacobian determinant of the reference map of element `e` at its centre.
    pub fn reference_jacobian(&self, e: usize) -> f64 {
        let [a, b, c, d] = self.elements[e].map(|k| self.coords[k]);
        let dx = [(b[0] + c[0] - a[0] - d[0]) / 4.0, (b[1] + c[1] - a[1] - d[1]) / 4.0];
        let dy = [(c[0] + d[0] - a[0] - b[0]) / 4.0, (c[1] + d[1] - a[1] - b[1]) / 4.0];
        dx[0] * dy[1] - dx[1] * dy[0]
    }
}

/// Nodal deviation `θ` from the affine map, `φ(x) = F₀x + θ(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementField {
    pub theta: Vec<[f64; 2]>,
}

impl DisplacementField {
    pub fn zeros(mesh: &QuadMesh) -> Self {
        DisplacementField {
            theta: vec![[0.0; 2]; mesh.num_nodes()],
        }
    }

    pub fn check_boundary(&self, mesh: &QuadMesh) -> Result<()> {
        if self.theta.len() != mesh.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "field has {} nodes, mesh has {}",
                self.theta.len(),
                mesh.num_nodes()
            )));
        }
        if let Some(a) = mesh
            .boundary_nodes()
            .into_iter()
            .find(|&a| self.theta[a] != [0.0, 0.0])
        {
            return Err(Error::InvalidInput(format!("boundary node {a} is displaced")));
        }
        Ok(())
    }

    /// Deformed position `φ(X)` of every node.
    pub fn deformed(&self, mesh: &QuadMesh, f0: &Mat2) -> Vec<[f64; 2]> {
        mesh.coords
            .iter()
            .zip(&self.theta)
            .map(|(x, t)| {
                let p = f0.apply(*x);
                [p[0] + t[0], p[1] + t[1]]
            })
            .collect()
    }

    /// Interior unknowns, two per node in node order.
    pub fn pack(&self, interior: &[usize]) -> Vec<f64> {
        interior.iter().flat_map(|&a| self.theta[a]).collect()
    }

    pub fn unpack(&mut self, interior: &[usize], x: &[f64]) {
        for (k, &a) in interior.iter().enumerate() {
            self.theta[a] = [x[2 * k], x[2 * k + 1]];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_mesh_counts() {
        let m = QuadMesh::new(20).unwrap();
        assert_eq!(m.num_nodes(), 441);
        assert_eq!(m.num_elements(), 400);
        assert_eq!(m.boundary_nodes().len(), 80);
        assert_eq!(m.interior_nodes().len(), 361);
        assert!((0..m.num_elements()).all(|e| m.reference_jacobian(e) > 0.0));
        assert_eq!(m.coords[m.node_id(20, 20)], [1.0, 1.0]);
    }

    #[test]
    fn displaced_boundary_is_detected() {
        let m = QuadMesh::new(3).unwrap();
        let mut f = DisplacementField::zeros(&m);
        assert!(f.check_boundary(&m).is_ok());
        f.theta[m.node_id(0, 1)] = [1e-3, 0.0];
        assert!(f.check_boundary(&m).is_err());
    }
}
