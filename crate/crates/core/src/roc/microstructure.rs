use crate::error::{Error, Result};
use crate::mat2::Mat2;

use super::laminate::{LaminationNode, LaminationTree};

/// Layer normal of a split: integer when the direction allows it, which
/// keeps layer phases exact on the sampling lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Normal {
    Integer([i64; 2]),
    Real([f64; 2]),
}

impl Normal {
    fn as_f64(&self) -> [f64; 2] {
        match *self {
            Normal::Integer(b) => [b[0] as f64, b[1] as f64],
            Normal::Real(b) => b,
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Writes a rank-one `d` as `a ⊗ b`.
fn decompose(d: &Mat2) -> (Normal, [f64; 2]) {
    let rows = [[d.a11, d.a12], [d.a21, d.a22]];
    let row = if rows[0][0].hypot(rows[0][1]) >= rows[1][0].hypot(rows[1][1]) {
        rows[0]
    } else {
        rows[1]
    };
    let (big, small) = if row[0].abs() >= row[1].abs() { (0, 1) } else { (1, 0) };
    let ratio = row[small] / row[big];
    let mut normal = None;
    for q in 1..=64i64 {
        let p = (q as f64 * ratio).round();
        if (q as f64 * ratio - p).abs() < 1e-9 * q as f64 {
            let p = p as i64;
            let g = gcd(q, p);
            let mut b = [0i64; 2];
            b[big] = q / g * row[big].signum() as i64;
            b[small] = p / g * row[big].signum() as i64;
            normal = Some(Normal::Integer(b));
            break;
        }
    }
    let normal = normal.unwrap_or_else(|| {
        let n = row[0].hypot(row[1]);
        Normal::Real([row[0] / n, row[1] / n])
    });
    let b = normal.as_f64();
    let bb = b[0] * b[0] + b[1] * b[1];
    let a = [
        (d.a11 * b[0] + d.a12 * b[1]) / bb,
        (d.a21 * b[0] + d.a22 * b[1]) / bb,
    ];
    (normal, a)
}

/// One split of the tree, flattened for evaluation.
#[derive(Clone, Debug)]
struct Split {
    normal: Normal,
    a: [f64; 2],
    /// Volume fraction of the first child.
    w0: f64,
    /// Layer slopes `c₀ = −w₁`, `c₁ = w₀` of the two phases.
    c: [f64; 2],
    children: [Option<Box<Split>>; 2],
}

fn build_split(node: &LaminationNode) -> Result<Option<Box<Split>>> {
    if node.is_leaf() {
        return Ok(None);
    }
    let (c0, c1) = (&node.children[0], &node.children[1]);
    let d = c1.f - c0.f;
    if d.max_abs() == 0.0 {
        return Err(Error::CorruptTree(format!("split of {} has identical children", node.f)));
    }
    let (normal, a) = decompose(&d);
    let b = normal.as_f64();
    let back = Mat2::outer(a, b);
    if (back - d).max_abs() > 1e-10 * (1.0 + d.max_abs()) {
        return Err(Error::CorruptTree(format!("child difference {d} is not rank-one")));
    }
    Ok(Some(Box::new(Split {
        normal,
        a,
        w0: c0.weight,
        c: [-c1.weight, c0.weight],
        children: [build_split(c0)?, build_split(c1)?],
    })))
}

/// Piecewise-affine deformation of `Ω = [−1, 1]²` realizing a laminate.
///
/// Nodal values on a uniform `(n+1) × (n+1)` lattice, node `(i, j)` at
/// `(−1 + 2i/n, −1 + 2j/n)` stored at `j·(n+1) + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Microstructure {
    pub resolution: usize,
    pub frequency: usize,
    pub f0: Mat2,
    pub phi: Vec<[f64; 2]>,
    /// Leaves (absolute weight, gradient) with `det ≤ 0`.
    pub negative_det_leaves: Vec<(f64, Mat2)>,
}

impl Microstructure {
    pub fn nodes_per_side(&self) -> usize {
        self.resolution + 1
    }

    pub fn position(&self, i: usize, j: usize) -> [f64; 2] {
        let n = self.resolution as f64;
        [-1.0 + 2.0 * i as f64 / n, -1.0 + 2.0 * j as f64 / n]
    }

    pub fn phi_at(&self, i: usize, j: usize) -> [f64; 2] {
        self.phi[j * (self.resolution + 1) + i]
    }

    /// `φ(x) − x`.
    pub fn displacement(&self, i: usize, j: usize) -> [f64; 2] {
        let p = self.phi_at(i, j);
        let x = self.position(i, j);
        [p[0] - x[0], p[1] - x[1]]
    }

    /// Cell-averaged gradient of the bilinear interpolant on cell `(i, j)`.
    pub fn cell_gradient(&self, i: usize, j: usize) -> Mat2 {
        let h = 2.0 / self.resolution as f64;
        let p00 = self.phi_at(i, j);
        let p10 = self.phi_at(i + 1, j);
        let p01 = self.phi_at(i, j + 1);
        let p11 = self.phi_at(i + 1, j + 1);
        let dx = |k: usize| (p10[k] + p11[k] - p00[k] - p01[k]) / (2.0 * h);
        let dy = |k: usize| (p01[k] + p11[k] - p00[k] - p10[k]) / (2.0 * h);
        Mat2::new(dx(0), dy(0), dx(1), dy(1))
    }

    /// Average of the cell gradients over `Ω`.
    pub fn mean_gradient(&self) -> Mat2 {
        let n = self.resolution;
        let mut acc = Mat2::ZERO;
        for j in 0..n {
            for i in 0..n {
                acc += self.cell_gradient(i, j);
            }
        }
        acc * (1.0 / (n * n) as f64)
    }

    /// Number of cells whose averaged gradient has `det ≤ 0`.
    pub fn negative_det_cells(&self) -> usize {
        let n = self.resolution;
        (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .filter(|&(i, j)| self.cell_gradient(i, j).det() <= 0.0)
            .count()
    }

    pub fn has_negative_det(&self) -> bool {
        !self.negative_det_leaves.is_empty()
    }
}

/// Layer coordinate phase `frac(b·x / P)` at lattice node `(i, j)` for the
/// period `P = 2 / frequency^{level+1}`.
fn phase(normal: &Normal, i: usize, j: usize, n: usize, fpow: u128, x: [f64; 2], period: f64) -> f64 {
    match *normal {
        Normal::Integer(b) => {
            // b·x / P = f^{k+1}·(−(b₁+b₂)n + 2(b₁i + b₂j)) / 2n, reduced exactly
            let m = 2 * n as i128;
            let num = -(b[0] + b[1]) as i128 * n as i128 + 2 * (b[0] as i128 * i as i128 + b[1] as i128 * j as i128);
            let f = (fpow % m as u128) as i128;
            (num.rem_euclid(m) * f).rem_euclid(m) as f64 / m as f64
        }
        Normal::Real(b) => ((b[0] * x[0] + b[1] * x[1]) / period).rem_euclid(1.0),
    }
}

/// Builds a layered deformation whose gradient takes the leaf values of
/// `tree` with the leaf volume fractions.
///
/// The top split has `frequency` layer periods per unit length of `b·x / 2`;
/// each deeper split is `frequency` times finer inside its parent layer.
pub fn reconstruct_microstructure(
    tree: &LaminationTree,
    frequency: usize,
    resolution: usize,
) -> Result<Microstructure> {
    if frequency < 1 {
        return Err(Error::InvalidInput("frequency must be at least 1".into()));
    }
    if resolution < 1 {
        return Err(Error::InvalidInput("resolution must be at least 1".into()));
    }
    tree.validate()?;
    let root = build_split(&tree.root)?;
    let f0 = tree.root.f;
    let n = resolution;
    let mut phi = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let x = [-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64];
            let mut p = f0.apply(x);
            let mut split = root.as_deref();
            let mut level = 0u32;
            let mut fpow = frequency as u128;
            while let Some(s) = split {
                let period = 2.0 / (frequency as f64).powi(level as i32 + 1);
                let tau = phase(&s.normal, i, j, n, fpow, x, period);
                let (g, child) = if tau < s.w0 {
                    (s.c[0] * tau, 0)
                } else {
                    (s.c[0] * s.w0 + s.c[1] * (tau - s.w0), 1)
                };
                let amp = g * period;
                p[0] += s.a[0] * amp;
                p[1] += s.a[1] * amp;
                split = s.children[child].as_deref();
                level += 1;
                fpow = fpow.saturating_mul(frequency as u128);
            }
            phi.push(p);
        }
    }
    let negative_det_leaves = tree
        .leaves()
        .into_iter()
        .filter(|(_, f)| f.det() <= 0.0)
        .collect();
    Ok(Microstructure {
        resolution,
        frequency,
        f0,
        phi,
        negative_det_leaves,
    })
}
