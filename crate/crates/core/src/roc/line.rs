use crate::mat2::Mat2;
use crate::tolerances::DET_POSITIVE;

use super::grid::Grid4;

/// Energy samples `(l, W(F + l·δ·R))` along a rank-one line.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneLine {
    pub ls: Vec<i64>,
    pub values: Vec<f64>,
}

impl RankOneLine {
    /// Fewer than two points: nothing to laminate.
    pub fn is_degenerate(&self) -> bool {
        self.ls.len() < 2
    }

    pub fn len(&self) -> usize {
        self.ls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ls.is_empty()
    }
}

/// Samples the line `{F + l·δ·R : l ∈ ℤ}` inside the grid box.
///
/// `r` is the unscaled rank-one direction; the step is `grid.delta · r`.
/// With `constrained`, only the connected run of `det > 0` points containing
/// `l = 0` is kept. Off-lattice points are interpolated.
pub fn line_points(f: &Mat2, r: &Mat2, grid: &Grid4, constrained: bool) -> RankOneLine {
    let step = *r * grid.delta;
    let admissible = |l: i64| {
        let p = *f + step * l as f64;
        grid.contains(&p) && (!constrained || p.det() > DET_POSITIVE)
    };
    if !admissible(0) {
        return RankOneLine {
            ls: vec![],
            values: vec![],
        };
    }
    let mut lo = 0i64;
    while admissible(lo - 1) {
        lo -= 1;
    }
    let mut hi = 0i64;
    while admissible(hi + 1) {
        hi += 1;
    }
    let ls: Vec<i64> = (lo..=hi).collect();
    let values = ls
        .iter()
        .map(|&l| {
            let p = *f + step * l as f64;
            grid.interpolate(&p).expect("admissible points lie in the grid box")
        })
        .collect();
    RankOneLine { ls, values }
}
