//! Legacy VTK ASCII unstructured-grid writer.

use std::io::Write;

use super::Mesh;
use crate::error::Result;

/// Writes `mesh` with optional point and cell scalar fields. Region codes are always written
/// as the `region` cell field.
pub fn write_vtk<W: Write>(
    mesh: &Mesh,
    title: &str,
    point_data: &[(&str, &[f64])],
    cell_data: &[(&str, &[f64])],
    out: &mut W,
) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.replace('\n', " "))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(out, "{} {} 0", p[0], p[1])?;
    }
    let n = mesh.elements.len();
    writeln!(out, "CELLS {} {}", n, 4 * n)?;
    for t in &mesh.elements {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {n}")?;
    for _ in 0..n {
        writeln!(out, "5")?;
    }
    writeln!(out, "CELL_DATA {n}")?;
    writeln!(out, "SCALARS region int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for e in 0..n {
        writeln!(out, "{}", mesh.element_tag(e).code())?;
    }
    for (name, vals) in cell_data {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in vals.iter() {
            writeln!(out, "{v}")?;
        }
    }
    if !point_data.is_empty() {
        writeln!(out, "POINT_DATA {}", mesh.nodes.len())?;
        for (name, vals) in point_data {
            writeln!(out, "SCALARS {name} double 1")?;
            writeln!(out, "LOOKUP_TABLE default")?;
            for v in vals.iter() {
                writeln!(out, "{v}")?;
            }
        }
    }
    Ok(())
}
