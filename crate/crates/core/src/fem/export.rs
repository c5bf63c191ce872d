use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::mat2::Mat2;

use super::diagnostics::element_mean_det;
use super::mesh::{DisplacementField, QuadMesh};

/// CSV `node,X,Y,x,y` of reference and deformed node positions.
pub fn write_mesh_csv(mesh: &QuadMesh, field: &DisplacementField, f0: &Mat2, path: &Path) -> Result<()> {
    let deformed = field.deformed(mesh, f0);
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "node,X,Y,x,y")?;
    for (a, (x, p)) in mesh.coords.iter().zip(&deformed).enumerate() {
        writeln!(w, "{a},{},{},{},{}", x[0], x[1], p[0], p[1])?;
    }
    w.flush()?;
    Ok(())
}

/// Legacy ASCII VTK unstructured grid of the deformed mesh with the mean
/// `det ∇φ` of each element as cell data.
pub fn write_mesh_vtk(mesh: &QuadMesh, field: &DisplacementField, f0: &Mat2, path: &Path) -> Result<()> {
    let deformed = field.deformed(mesh, f0);
    let dets = element_mean_det(mesh, field, f0);
    let ne = mesh.num_elements();
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "deformed mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.num_nodes())?;
    for p in &deformed {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    writeln!(w, "CELLS {} {}", ne, 5 * ne)?;
    for el in &mesh.elements {
        writeln!(w, "4 {} {} {} {}", el[0], el[1], el[2], el[3])?;
    }
    writeln!(w, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        // VTK_QUAD
        writeln!(w, "9")?;
    }
    writeln!(w, "CELL_DATA {ne}")?;
    writeln!(w, "SCALARS det double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for d in dets {
        writeln!(w, "{d}")?;
    }
    w.flush()?;
    Ok(())
}
