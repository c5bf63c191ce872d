use serde::{Deserialize, Serialize};

use crate::convexify::{lower_convex_hull, SampledCurve};
use crate::energy::EnergyDensity;
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::tolerances::RANK_ONE;

use super::iterate::RocResult;
use super::line::line_points;

/// Node of a lamination tree.
///
/// `weight` is relative to the parent (the root has weight 1). An internal
/// node stores the rank-one `direction` along which it splits, and its two
/// children average (with their weights) to the node's matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaminationNode {
    #[serde(rename = "F")]
    pub f: Mat2,
    pub weight: f64,
    pub direction: Option<Mat2>,
    pub children: Vec<LaminationNode>,
}

impl LaminationNode {
    pub fn leaf(f: Mat2, weight: f64) -> Self {
        LaminationNode {
            f,
            weight,
            direction: None,
            children: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(|c| c.count()).sum::<usize>()
    }

    fn collect_leaves(&self, weight: f64, out: &mut Vec<(f64, Mat2)>) {
        if self.is_leaf() {
            out.push((weight, self.f));
        } else {
            for c in &self.children {
                c.collect_leaves(weight * c.weight, out);
            }
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        if !(self.weight > 0.0 && self.weight <= 1.0 + 1e-15) {
            return Err(Error::CorruptTree(format!("{path}: weight {} outside (0, 1]", self.weight)));
        }
        if !self.f.is_finite() {
            return Err(Error::CorruptTree(format!("{path}: non-finite matrix")));
        }
        match self.children.len() {
            0 => Ok(()),
            2 => {
                let (c0, c1) = (&self.children[0], &self.children[1]);
                let wsum = c0.weight + c1.weight;
                if (wsum - 1.0).abs() > 1e-12 {
                    return Err(Error::CorruptTree(format!("{path}: child weights sum to {wsum}")));
                }
                let scale = 1.0 + self.f.max_abs().max(c0.f.max_abs()).max(c1.f.max_abs());
                let mean = c0.f * c0.weight + c1.f * c1.weight;
                if (mean - self.f).max_abs() > 1e-10 * scale {
                    return Err(Error::CorruptTree(format!(
                        "{path}: children average to {mean}, not {}",
                        self.f
                    )));
                }
                let diff = c1.f - c0.f;
                if diff.det().abs() > RANK_ONE * scale * scale {
                    return Err(Error::CorruptTree(format!(
                        "{path}: child difference {diff} is not rank-one"
                    )));
                }
                if let Some(d) = self.direction {
                    let dn = d.norm_sq();
                    if dn == 0.0 {
                        return Err(Error::CorruptTree(format!("{path}: zero split direction")));
                    }
                    let along = d * (diff.dot(&d) / dn);
                    if (diff - along).max_abs() > 1e-10 * scale {
                        return Err(Error::CorruptTree(format!(
                            "{path}: children differ by {diff}, not along {d}"
                        )));
                    }
                }
                c0.validate(&format!("{path}.0"))?;
                c1.validate(&format!("{path}.1"))
            }
            n => Err(Error::CorruptTree(format!("{path}: {n} children, expected 0 or 2"))),
        }
    }
}

/// A laminate (ℋₙ sequence) rooted at a query matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LaminationTree {
    pub root: LaminationNode,
    /// Directions along which a split of the root with the same energy
    /// (to 1e-9) exists in the converged grid, besides the recorded one.
    pub tied_directions: Vec<Mat2>,
}

impl LaminationTree {
    pub fn single(f: Mat2) -> Self {
        LaminationTree {
            root: LaminationNode::leaf(f, 1.0),
            tied_directions: Vec::new(),
        }
    }

    /// Leaves with absolute volume fractions (products of relative weights).
    pub fn leaves(&self) -> Vec<(f64, Mat2)> {
        let mut out = Vec::new();
        self.root.collect_leaves(1.0, &mut out);
        out
    }

    /// `Σ wᵢ W(Fᵢ)` over the leaves.
    pub fn leaf_energy<W: EnergyDensity + ?Sized>(&self, w: &W) -> f64 {
        self.leaves().iter().map(|(wt, f)| wt * w.value(f)).sum()
    }

    /// Weighted leaf average, equal to the root matrix for a valid tree.
    pub fn leaf_mean(&self) -> Mat2 {
        self.leaves()
            .iter()
            .fold(Mat2::ZERO, |acc, (wt, f)| acc + *f * *wt)
    }

    pub fn has_non_unique_split(&self) -> bool {
        !self.tied_directions.is_empty()
    }

    /// Checks weights, averages and rank-one compatibility at every node.
    pub fn validate(&self) -> Result<()> {
        if (self.root.weight - 1.0).abs() > 1e-15 {
            return Err(Error::CorruptTree(format!("root weight {} is not 1", self.root.weight)));
        }
        self.root.validate("root")?;
        let total: f64 = self.leaves().iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::CorruptTree(format!("leaf weights sum to {total}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.root)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let root: LaminationNode = serde_json::from_str(s)?;
        Ok(LaminationTree {
            root,
            tied_directions: Vec::new(),
        })
    }
}

/// Expands the recorded minimizing splits of a run into a lamination tree.
///
/// `f0` must be a lattice point. A node expands through the latest split
/// recorded at or below its iteration level; children continue one level
/// lower. Nodes without a recorded split are leaves and carry their
/// original energy.
pub fn extract_laminates<W: EnergyDensity + ?Sized>(
    result: &RocResult,
    w: &W,
    f0: &Mat2,
) -> Result<LaminationTree> {
    if result.records.is_none() {
        return Err(Error::InvalidInput(
            "minimizer recording was disabled for this run".into(),
        ));
    }
    let grid = &result.grid;
    let node = grid
        .node_of(f0)
        .ok_or_else(|| Error::InvalidInput(format!("{f0} is not a lattice point of the grid")))?;

    fn expand(result: &RocResult, node: usize, level: usize, weight: f64) -> LaminationNode {
        let grid = &result.grid;
        let f = grid.point(node);
        let Some((k, rec)) = result.latest_split(node, level) else {
            return LaminationNode::leaf(f, weight);
        };
        let dir = &result.directions.dirs[rec.dir as usize];
        let offset: i64 = dir
            .entries()
            .iter()
            .zip(grid.strides)
            .map(|(&e, s)| e as i64 * s as i64)
            .sum();
        let n1 = (node as i64 + rec.l1 as i64 * offset) as usize;
        let n2 = (node as i64 + rec.l2 as i64 * offset) as usize;
        let lambda = rec.lambda();
        LaminationNode {
            f,
            weight,
            direction: Some(dir.matrix(grid.delta)),
            children: vec![
                expand(result, n1, k, lambda),
                expand(result, n2, k, 1.0 - lambda),
            ],
        }
    }

    let root = expand(result, node, result.iterations(), 1.0);
    let root_value = grid.values[node];

    // other directions reaching the same value in the converged grid
    let mut tied_directions = Vec::new();
    let recorded = root.direction;
    for dir in result.directions.iter() {
        let r = dir.matrix(1.0);
        if recorded.is_some_and(|d| d == dir.matrix(grid.delta)) {
            continue;
        }
        let line = line_points(f0, &r, grid, result.constrained);
        if line.is_degenerate() {
            continue;
        }
        let ts: Vec<f64> = line.ls.iter().map(|&l| l as f64).collect();
        let Ok(curve) = SampledCurve::new(ts, line.values) else {
            continue;
        };
        let hull = lower_convex_hull(&curve);
        // a split exists when l = 0 is not a hull vertex
        let at_zero = hull.eval(0.0).unwrap_or(f64::INFINITY);
        if recorded.is_some()
            && (at_zero - root_value).abs() < 1e-9
            && hull.hull_ts.iter().all(|&t| t != 0.0)
        {
            tied_directions.push(dir.matrix(grid.delta));
        }
    }

    let tree = LaminationTree {
        root,
        tied_directions,
    };
    tree.validate()?;
    let energy = tree.leaf_energy(w);
    if (energy - root_value).abs() > 1e-9 * (1.0 + root_value.abs()) {
        return Err(Error::CorruptTree(format!(
            "leaf energy {energy} differs from the grid value {root_value}"
        )));
    }
    Ok(tree)
}
