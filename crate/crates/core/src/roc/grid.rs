use rayon::prelude::*;

use crate::energy::EnergyDensity;
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::tolerances::GRID_SLACK;

/// Closed per-component bounds `[lo, hi]`, components in the order
/// `(a11, a12, a21, a22)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridBounds {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl GridBounds {
    /// The box `|A|_∞ ≤ r`.
    pub fn radius(r: f64) -> Self {
        GridBounds {
            lo: [-r; 4],
            hi: [r; 4],
        }
    }

    /// Compression box: diagonal entries in `[δ, 1]`, off-diagonal in `[−1, 1]`.
    pub fn compression(delta: f64) -> Self {
        GridBounds {
            lo: [delta, -1.0, -1.0, delta],
            hi: [1.0, 1.0, 1.0, 1.0],
        }
    }
}

/// Configuration of a rank-one convexification run.
#[derive(Clone, Debug, PartialEq)]
pub struct RocConfig {
    pub delta: f64,
    pub bounds: GridBounds,
    /// Direction order `l`: `a, b ∈ ℤ²` with `|a|_∞, |b|_∞ ≤ l`.
    pub order: u32,
    pub k_max: usize,
    /// Restrict lamination lines to `det F > 0`.
    pub constrained: bool,
    /// Stop once the largest nodewise decrease of a sweep falls below this.
    pub early_stop: f64,
    /// Keep the minimizing split of every node in every iteration.
    pub record_minimizers: bool,
    pub memory_budget_bytes: usize,
}

pub const DEFAULT_MEMORY_BUDGET: usize = 2 << 30;

impl RocConfig {
    /// Lattice `δℤ²ˣ² ∩ {|A|_∞ ≤ r}` with unconstrained lines.
    pub fn unconstrained(delta: f64, radius: f64) -> Self {
        RocConfig {
            delta,
            bounds: GridBounds::radius(radius),
            order: 1,
            k_max: 10,
            constrained: false,
            early_stop: crate::tolerances::EARLY_STOP,
            record_minimizers: true,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET,
        }
    }

    /// Compression box with lines restricted to `GL⁺(2)`.
    pub fn constrained(delta: f64) -> Self {
        RocConfig {
            bounds: GridBounds::compression(delta),
            constrained: true,
            ..RocConfig::unconstrained(delta, 1.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidInput(format!("grid width must be > 0, got {}", self.delta)));
        }
        if self.k_max < 1 {
            return Err(Error::InvalidInput("k_max must be at least 1".into()));
        }
        if self.order < 1 {
            return Err(Error::InvalidInput("direction order must be at least 1".into()));
        }
        for c in 0..4 {
            let (lo, hi) = (self.bounds.lo[c], self.bounds.hi[c]);
            if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
                return Err(Error::InvalidInput(format!(
                    "invalid bounds [{lo}, {hi}] on component {c}"
                )));
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> [usize; 4] {
        let mut shape = [0; 4];
        for (c, s) in shape.iter_mut().enumerate() {
            let span = self.bounds.hi[c] - self.bounds.lo[c];
            *s = (span / self.delta + 1e-9).floor() as usize + 1;
        }
        shape
    }

    /// Bytes held by a run: two value buffers plus minimizer records.
    pub fn required_bytes(&self) -> (usize, usize) {
        let nodes: usize = self.shape().iter().product();
        let per_node = 2 * std::mem::size_of::<f64>()
            + std::mem::size_of::<super::iterate::SplitRecord>()
                * if self.record_minimizers { self.k_max + 1 } else { 1 };
        (nodes, nodes.saturating_mul(per_node))
    }

    pub fn check_memory(&self) -> Result<()> {
        let (nodes, required_bytes) = self.required_bytes();
        if required_bytes > self.memory_budget_bytes {
            return Err(Error::MemoryBudget {
                nodes,
                required_bytes,
                budget_bytes: self.memory_budget_bytes,
            });
        }
        Ok(())
    }
}

/// Dense lattice of energy values over a box in ℝ²ˣ².
///
/// Node `(i₁₁, i₁₂, i₂₁, i₂₂)` sits at `F_c = lo_c + i_c·δ`; storage is
/// row-major with `a22` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid4 {
    pub delta: f64,
    pub lo: [f64; 4],
    pub shape: [usize; 4],
    pub strides: [usize; 4],
    pub values: Vec<f64>,
}

impl Grid4 {
    pub fn from_values(delta: f64, lo: [f64; 4], shape: [usize; 4], values: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if values.len() != n {
            return Err(Error::InvalidInput(format!(
                "grid of shape {shape:?} needs {n} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite".into()));
        }
        let strides = [
            shape[1] * shape[2] * shape[3],
            shape[2] * shape[3],
            shape[3],
            1,
        ];
        Ok(Grid4 {
            delta,
            lo,
            shape,
            strides,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn hi(&self) -> [f64; 4] {
        let mut hi = [0.0; 4];
        for c in 0..4 {
            hi[c] = self.lo[c] + (self.shape[c] - 1) as f64 * self.delta;
        }
        hi
    }

    pub fn multi_index(&self, mut linear: usize) -> [usize; 4] {
        let mut idx = [0; 4];
        for c in 0..4 {
            idx[c] = linear / self.strides[c];
            linear %= self.strides[c];
        }
        idx
    }

    pub fn linear_index(&self, idx: [usize; 4]) -> usize {
        (0..4).map(|c| idx[c] * self.strides[c]).sum()
    }

    pub fn point_of_index(&self, idx: [usize; 4]) -> Mat2 {
        let mut f = Mat2::ZERO;
        for c in 0..4 {
            f.set(c, self.lo[c] + idx[c] as f64 * self.delta);
        }
        f
    }

    pub fn point(&self, linear: usize) -> Mat2 {
        self.point_of_index(self.multi_index(linear))
    }

    /// Whether `f` lies in the grid box, with a small slack.
    pub fn contains(&self, f: &Mat2) -> bool {
        let hi = self.hi();
        (0..4).all(|c| {
            let x = f.get(c);
            x >= self.lo[c] - GRID_SLACK && x <= hi[c] + GRID_SLACK
        })
    }

    /// Lattice node at `f`, if `f` is a lattice point (to 1e-9 in index units).
    pub fn node_of(&self, f: &Mat2) -> Option<usize> {
        let mut idx = [0usize; 4];
        for c in 0..4 {
            let p = (f.get(c) - self.lo[c]) / self.delta;
            let r = p.round();
            if (p - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.shape[c] {
                return None;
            }
            idx[c] = r as usize;
        }
        Some(self.linear_index(idx))
    }

    /// Multilinear interpolation of the stored values; `None` outside the box.
    pub fn interpolate(&self, f: &Mat2) -> Option<f64> {
        if !self.contains(f) {
            return None;
        }
        let mut base = [0usize; 4];
        let mut frac = [0.0f64; 4];
        for c in 0..4 {
            let p = ((f.get(c) - self.lo[c]) / self.delta).max(0.0);
            let r = p.round();
            if (p - r).abs() < 1e-9 {
                base[c] = (r as usize).min(self.shape[c] - 1);
                frac[c] = 0.0;
            } else {
                let i = (p.floor() as usize).min(self.shape[c].saturating_sub(2));
                base[c] = i;
                frac[c] = (p - i as f64).clamp(0.0, 1.0);
            }
        }
        let mut acc = 0.0;
        for corner in 0..16usize {
            let mut weight = 1.0;
            let mut lin = 0;
            for c in 0..4 {
                let up = (corner >> c) & 1 == 1;
                let w = if up { frac[c] } else { 1.0 - frac[c] };
                if w == 0.0 {
                    weight = 0.0;
                    break;
                }
                weight *= w;
                lin += (base[c] + up as usize) * self.strides[c];
            }
            if weight != 0.0 {
                acc += weight * self.values[lin];
            }
        }
        Some(acc)
    }
}

/// Samples `W` at every lattice node of the configured box.
pub fn build_grid<W: EnergyDensity + ?Sized>(w: &W, cfg: &RocConfig) -> Result<Grid4> {
    cfg.validate()?;
    cfg.check_memory()?;
    let shape = cfg.shape();
    let n: usize = shape.iter().product();
    let mut grid = Grid4::from_values(cfg.delta, cfg.bounds.lo, shape, vec![0.0; n])?;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| w.value(&grid.point(i)))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "energy is not finite at grid point {}",
            grid.point(i)
        )));
    }
    grid.values = values;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{Biot, Dist};

    #[test]
    fn unit_grid_has_81_nodes() {
        let cfg = RocConfig::unconstrained(1.0, 1.0);
        let g = build_grid(&Biot, &cfg).unwrap();
        assert_eq!(g.len(), 81);
        let id = g.node_of(&Mat2::IDENTITY).unwrap();
        assert_eq!(g.values[id], 0.0);
    }

    #[test]
    fn paper_grid_shape() {
        let cfg = RocConfig::unconstrained(0.1, 2.0);
        assert_eq!(cfg.shape(), [41; 4]);
    }

    #[test]
    fn dist_grid_reflection_node() {
        let g = build_grid(&Dist, &RocConfig::unconstrained(0.5, 1.0)).unwrap();
        let i = g.node_of(&Mat2::diag(1.0, -1.0)).unwrap();
        assert!((g.values[i] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn compression_box_shape() {
        let cfg = RocConfig::constrained(0.1);
        assert_eq!(cfg.shape(), [10, 21, 21, 10]);
        let g = build_grid(&Biot, &cfg).unwrap();
        let i = g.node_of(&Mat2::scaled_identity(0.4)).unwrap();
        assert!((g.values[i] - 0.72).abs() < 1e-12);
    }

    #[test]
    fn memory_budget_is_enforced() {
        let mut cfg = RocConfig::unconstrained(0.1, 2.0);
        cfg.memory_budget_bytes = 1 << 20;
        match build_grid(&Biot, &cfg) {
            Err(Error::MemoryBudget { nodes, .. }) => assert_eq!(nodes, 41usize.pow(4)),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn interpolation_reproduces_multilinear_functions() {
        // f(F) = 1 + a11 − 2 a12 + 3 a21 a22 is multilinear, so interpolation is exact
        let lin = |f: &Mat2| 1.0 + f.a11 - 2.0 * f.a12 + 3.0 * f.a21 * f.a22;
        let cfg = RocConfig::unconstrained(0.25, 1.0);
        let shape = cfg.shape();
        let n = shape.iter().product();
        let mut g = Grid4::from_values(0.25, cfg.bounds.lo, shape, vec![0.0; n]).unwrap();
        g.values = (0..n).map(|i| lin(&g.point(i))).collect();
        for f in [
            Mat2::new(0.13, -0.71, 0.52, 0.9),
            Mat2::new(-1.0, 1.0, 0.0, 0.33),
            Mat2::new(0.25, 0.5, -0.75, 0.1),
        ] {
            assert!((g.interpolate(&f).unwrap() - lin(&f)).abs() < 1e-12);
        }
        assert!(g.interpolate(&Mat2::new(1.2, 0.0, 0.0, 0.0)).is_none());
    }
}
