//! Grid snapshots, iteration traces and microstructure exports.
//!
//! A grid snapshot is a pair of files: `<stem>.bin` holds the node values as
//! little-endian `f64`, row-major over `(a11, a12, a21, a22)` with `a22`
//! fastest; `<stem>.csv` is the header
//!
//! ```text
//! axis,lo,hi,len,delta
//! a11,-2,2,41,0.1
//! ...
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::grid::Grid4;
use super::iterate::IterationStats;
use super::microstructure::Microstructure;

const AXES: [&str; 4] = ["a11", "a12", "a21", "a22"];

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `<stem>.bin` and `<stem>.csv`; returns both paths.
pub fn write_grid(grid: &Grid4, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let bin = with_ext(stem, "bin");
    let csv = with_ext(stem, "csv");
    let mut w = BufWriter::new(fs::File::create(&bin)?);
    for v in &grid.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let hi = grid.hi();
    let mut h = String::from("axis,lo,hi,len,delta\n");
    for c in 0..4 {
        h.push_str(&format!(
            "{},{},{},{},{}\n",
            AXES[c], grid.lo[c], hi[c], grid.shape[c], grid.delta
        ));
    }
    fs::write(&csv, h)?;
    Ok((bin, csv))
}

fn bad_header(msg: impl Into<String>) -> Error {
    Error::InvalidInput(format!("grid header: {}", msg.into()))
}

/// Reads a snapshot written by [`write_grid`].
pub fn read_grid(stem: &Path) -> Result<Grid4> {
    let header = fs::read_to_string(with_ext(stem, "csv"))?;
    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some("axis,lo,hi,len,delta") {
        return Err(bad_header("unexpected column names"));
    }
    let mut lo = [0.0; 4];
    let mut shape = [0usize; 4];
    let mut delta = None;
    for c in 0..4 {
        let line = lines.next().ok_or_else(|| bad_header("missing axis rows"))?;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 5 || fields[0] != AXES[c] {
            return Err(bad_header(format!("malformed row {line:?}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad_header(format!("bad number {s:?}")));
        lo[c] = num(fields[1])?;
        shape[c] = fields[3]
            .parse()
            .map_err(|_| bad_header(format!("bad length {:?}", fields[3])))?;
        let d = num(fields[4])?;
        if delta.is_some_and(|x| x != d) {
            return Err(bad_header("inconsistent grid width"));
        }
        delta = Some(d);
    }
    let bytes = fs::read(with_ext(stem, "bin"))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidInput("grid values file is truncated".into()));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Grid4::from_values(delta.unwrap_or(0.0), lo, shape, values)
}

/// `iteration,max_decrease,improved_nodes` per sweep.
pub fn write_trace(trace: &[IterationStats], path: &Path) -> Result<()> {
    let mut s = String::from("iteration,max_decrease,improved_nodes\n");
    for t in trace {
        s.push_str(&format!("{},{},{}\n", t.iteration, t.max_decrease, t.improved_nodes));
    }
    fs::write(path, s)?;
    Ok(())
}

/// Nodal determinant: average of the adjacent cell gradients' determinants.
fn nodal_det(m: &Microstructure, i: usize, j: usize) -> f64 {
    let n = m.resolution;
    let mut acc = 0.0;
    let mut cnt = 0;
    for cj in j.saturating_sub(1)..=j.min(n - 1) {
        for ci in i.saturating_sub(1)..=i.min(n - 1) {
            acc += m.cell_gradient(ci, cj).det();
            cnt += 1;
        }
    }
    acc / cnt as f64
}

/// CSV with columns `x,y,u1,u2,det`, one row per lattice node; `u = φ(x) − x`.
pub fn write_microstructure_csv(m: &Microstructure, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x,y,u1,u2,det")?;
    for j in 0..=m.resolution {
        for i in 0..=m.resolution {
            let x = m.position(i, j);
            let u = m.displacement(i, j);
            writeln!(w, "{},{},{},{},{}", x[0], x[1], u[0], u[1], nodal_det(m, i, j))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Legacy ASCII VTK structured grid of the deformed configuration, with the
/// displacement as point vectors and `det ∇φ` per cell.
pub fn write_microstructure_vtk(m: &Microstructure, path: &Path) -> Result<()> {
    let n = m.resolution;
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "laminate microstructure, frequency {}", m.frequency)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_GRID")?;
    writeln!(w, "DIMENSIONS {} {} 1", n + 1, n + 1)?;
    writeln!(w, "POINTS {} double", (n + 1) * (n + 1))?;
    for p in &m.phi {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    writeln!(w, "POINT_DATA {}", (n + 1) * (n + 1))?;
    writeln!(w, "VECTORS displacement double")?;
    for j in 0..=n {
        for i in 0..=n {
            let u = m.displacement(i, j);
            writeln!(w, "{} {} 0", u[0], u[1])?;
        }
    }
    writeln!(w, "CELL_DATA {}", n * n)?;
    writeln!(w, "SCALARS det double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for j in 0..n {
        for i in 0..n {
            writeln!(w, "{}", m.cell_gradient(i, j).det())?;
        }
    }
    w.flush()?;
    Ok(())
}
