use rayon::prelude::*;

use crate::convexify::lower_hull_indices;
use crate::error::{Error, Result};
use crate::tolerances::{DET_POSITIVE, IMPROVEMENT};

use super::directions::{DirectionSet, RankOneDirection};
use super::grid::{Grid4, RocConfig};

/// Minimizing two-point split of one node in one iteration.
///
/// `W^{k}(F) = λ·W^{k−1}(F + l₁δR) + (1−λ)·W^{k−1}(F + l₂δR)` with
/// `l₁ < 0 < l₂` and `λ = l₂ / (l₂ − l₁)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitRecord {
    pub dir: u16,
    pub l1: i16,
    pub l2: i16,
}

impl SplitRecord {
    pub const NONE: SplitRecord = SplitRecord {
        dir: u16::MAX,
        l1: 0,
        l2: 0,
    };

    pub fn is_some(&self) -> bool {
        self.dir != u16::MAX
    }

    /// Weight of the `l₁` endpoint.
    pub fn lambda(&self) -> f64 {
        self.l2 as f64 / (self.l2 as f64 - self.l1 as f64)
    }
}

/// Per-iteration summary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationStats {
    pub iteration: usize,
    pub max_decrease: f64,
    pub improved_nodes: usize,
}

/// Output of [`roc_iterate`].
#[derive(Clone, Debug)]
pub struct RocResult {
    /// Values after the last iteration.
    pub grid: Grid4,
    pub directions: DirectionSet,
    pub constrained: bool,
    pub trace: Vec<IterationStats>,
    /// `records[k]` holds the splits that produced `W^{k+1}` from `W^k`.
    pub records: Option<Vec<Vec<SplitRecord>>>,
}

impl RocResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Latest recorded split of `node` among the first `level` iterations.
    pub fn latest_split(&self, node: usize, level: usize) -> Option<(usize, SplitRecord)> {
        let records = self.records.as_ref()?;
        (0..level.min(records.len()))
            .rev()
            .find_map(|k| {
                let r = records[k][node];
                r.is_some().then_some((k, r))
            })
    }
}

/// Linear offset of one lattice step along `dir`, with per-component steps.
fn lattice_step(grid: &Grid4, dir: &RankOneDirection) -> ([i64; 4], i64) {
    let e = dir.entries();
    let steps = e.map(|v| v as i64);
    let offset = (0..4).map(|c| steps[c] * grid.strides[c] as i64).sum();
    (steps, offset)
}

fn in_shape(idx: &[i64; 4], shape: &[usize; 4]) -> bool {
    (0..4).all(|c| idx[c] >= 0 && (idx[c] as usize) < shape[c])
}

/// Nodes whose predecessor along `steps` leaves the grid.
fn line_starts(grid: &Grid4, steps: &[i64; 4]) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| {
            let idx = grid.multi_index(i);
            let prev = [0, 1, 2, 3].map(|c| idx[c] as i64 - steps[c]);
            !in_shape(&prev, &grid.shape)
        })
        .collect()
}

#[derive(Default)]
struct LineScratch {
    nodes: Vec<usize>,
    vals: Vec<f64>,
    hull: Vec<usize>,
}

/// Convexifies every line of one direction and reports nodes whose hull
/// value drops below their current value.
fn sweep_direction(
    grid: &Grid4,
    old: &[f64],
    positive: Option<&[bool]>,
    dir: &RankOneDirection,
) -> Vec<(usize, f64, i16, i16)> {
    let (steps, offset) = lattice_step(grid, dir);
    let starts = line_starts(grid, &steps);
    starts
        .par_iter()
        .fold(
            || (LineScratch::default(), Vec::new()),
            |(mut scratch, mut out), &start| {
                scratch.nodes.clear();
                let mut idx = grid.multi_index(start).map(|v| v as i64);
                let mut lin = start as i64;
                while in_shape(&idx, &grid.shape) {
                    scratch.nodes.push(lin as usize);
                    for c in 0..4 {
                        idx[c] += steps[c];
                    }
                    lin += offset;
                }
                let nodes = std::mem::take(&mut scratch.nodes);
                // maximal runs of admissible nodes
                let mut s = 0;
                while s < nodes.len() {
                    if positive.is_some_and(|p| !p[nodes[s]]) {
                        s += 1;
                        continue;
                    }
                    let mut e = s + 1;
                    while e < nodes.len() && positive.map_or(true, |p| p[nodes[e]]) {
                        e += 1;
                    }
                    if e - s >= 2 {
                        convexify_run(&nodes[s..e], old, &mut scratch, &mut out);
                    }
                    s = e;
                }
                scratch.nodes = nodes;
                (scratch, out)
            },
        )
        .map(|(_, out)| out)
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        })
}

fn convexify_run(
    run: &[usize],
    old: &[f64],
    scratch: &mut LineScratch,
    out: &mut Vec<(usize, f64, i16, i16)>,
) {
    scratch.vals.clear();
    scratch.vals.extend(run.iter().map(|&n| old[n]));
    lower_hull_indices(|i| i as f64, &scratch.vals, &mut scratch.hull);
    let vals = &scratch.vals;
    for seg in scratch.hull.windows(2) {
        let (left, right) = (seg[0], seg[1]);
        let (vl, vr) = (vals[left], vals[right]);
        let width = (right - left) as f64;
        for p in left + 1..right {
            let hv = vl + (vr - vl) * (p - left) as f64 / width;
            if hv < vals[p] - IMPROVEMENT {
                out.push((run[p], hv, (left as i64 - p as i64) as i16, (right - p) as i16));
            }
        }
    }
}

/// Iterated lamination along lattice rank-one lines.
///
/// Every sweep reads only the previous iterate: for each node and each
/// direction the line through the node is convexified and the hull value at
/// the node is taken; the node keeps the smallest value over directions.
/// Ties keep the earlier direction.
pub fn roc_iterate(mut grid: Grid4, dirs: &DirectionSet, cfg: &RocConfig) -> Result<RocResult> {
    cfg.validate()?;
    cfg.check_memory()?;
    if dirs.is_empty() {
        return Err(Error::InvalidInput("direction set is empty".into()));
    }
    let max_len = *grid.shape.iter().max().unwrap_or(&1);
    if max_len > i16::MAX as usize {
        return Err(Error::InvalidInput(format!(
            "lines of {max_len} points exceed the split record range"
        )));
    }
    let positive: Option<Vec<bool>> = cfg.constrained.then(|| {
        (0..grid.len())
            .into_par_iter()
            .map(|i| grid.point(i).det() > DET_POSITIVE)
            .collect()
    });

    let mut trace = Vec::new();
    let mut records: Option<Vec<Vec<SplitRecord>>> = cfg.record_minimizers.then(Vec::new);
    for k in 0..cfg.k_max {
        let old = &grid.values;
        let mut best = old.clone();
        let mut rec = vec![SplitRecord::NONE; if records.is_some() { old.len() } else { 0 }];
        for (d, dir) in dirs.iter().enumerate() {
            for (node, hv, l1, l2) in sweep_direction(&grid, old, positive.as_deref(), dir) {
                if hv < best[node] - IMPROVEMENT {
                    best[node] = hv;
                    if !rec.is_empty() {
                        rec[node] = SplitRecord { dir: d as u16, l1, l2 };
                    }
                }
            }
        }
        let (max_decrease, improved_nodes) = old
            .iter()
            .zip(&best)
            .filter(|(o, b)| b < o)
            .fold((0.0f64, 0usize), |(m, n), (o, b)| (m.max(o - b), n + 1));
        grid.values = best;
        if let Some(r) = records.as_mut() {
            r.push(rec);
        }
        trace.push(IterationStats {
            iteration: k + 1,
            max_decrease,
            improved_nodes,
        });
        if max_decrease < cfg.early_stop {
            break;
        }
    }
    Ok(RocResult {
        grid,
        directions: dirs.clone(),
        constrained: cfg.constrained,
        trace,
        records,
    })
}
