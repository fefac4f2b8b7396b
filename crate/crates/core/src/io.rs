//! Artifact writers: legacy ASCII VTK and CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fem::DofMap;
use crate::mesh::Mesh;
use crate::scalar::Scalar;
use crate::stepper::StateHistory;

const VTK_TRIANGLE: u8 = 5;

/// Nodal 2-vector attached to the points of a VTK file (full nodal layout).
pub struct PointVectors<'a, T> {
    pub name: &'a str,
    pub values: &'a [T],
}

/// Writes the mesh as a legacy VTK 2.0 unstructured grid.
///
/// With `displacement` (full nodal layout) the points are moved by it.
pub fn write_vtk<T: Scalar, W: Write>(
    out: &mut W,
    title: &str,
    mesh: &Mesh<T>,
    displacement: Option<&[T]>,
    vectors: &[PointVectors<'_, T>],
) -> std::io::Result<()> {
    let n = mesh.node_count();
    let full_len = 2 * n;
    let bad = |len: usize| {
        std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("expected {full_len} nodal values, got {len}"))
    };
    if let Some(d) = displacement {
        if d.len() != full_len {
            return Err(bad(d.len()));
        }
    }
    if let Some(v) = vectors.iter().find(|v| v.values.len() != full_len) {
        return Err(bad(v.values.len()));
    }

    writeln!(out, "# vtk DataFile Version 2.0")?;
    writeln!(out, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {n} double")?;
    for (i, p) in mesh.nodes().iter().enumerate() {
        let (dx, dy) = displacement.map_or((T::zero(), T::zero()), |d| (d[2 * i], d[2 * i + 1]));
        writeln!(out, "{} {} 0", p[0] + dx, p[1] + dy)?;
    }
    let tris = mesh.triangles();
    writeln!(out, "CELLS {} {}", tris.len(), 4 * tris.len())?;
    for t in tris {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {}", tris.len())?;
    for _ in tris {
        writeln!(out, "{VTK_TRIANGLE}")?;
    }
    if !vectors.is_empty() {
        writeln!(out, "POINT_DATA {n}")?;
        for v in vectors {
            writeln!(out, "VECTORS {} double", v.name)?;
            for c in v.values.chunks(2) {
                writeln!(out, "{} {} 0", c[0], c[1])?;
            }
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// [`write_vtk`] to a file.
pub fn write_vtk_file<T: Scalar>(
    path: &Path,
    title: &str,
    mesh: &Mesh<T>,
    displacement: Option<&[T]>,
    vectors: &[PointVectors<'_, T>],
) -> Result<()> {
    let mut w = create(path)?;
    write_vtk(&mut w, title, mesh, displacement, vectors)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// One VTK file per selected time node `j`, named `{stem}_{j:04}.vtk`, with
/// the deformed mesh and the displacement and velocity vectors (`v_0 = 0`).
pub fn write_vtk_series<T: Scalar>(
    dir: &Path,
    stem: &str,
    mesh: &Mesh<T>,
    dofmap: &DofMap,
    history: &StateHistory<T>,
    nodes: &[usize],
) -> Result<Vec<PathBuf>> {
    let zero = vec![T::zero(); dofmap.full_size()];
    let mut written = Vec::with_capacity(nodes.len());
    for &j in nodes {
        let Some(d) = history.displacements.get(j) else {
            return Err(Error::InvalidTimeGrid(format!("time node {j} not in history")));
        };
        let d = dofmap.expand(d);
        let v = if j == 0 { zero.clone() } else { dofmap.expand(history.velocity(j)) };
        let path = dir.join(format!("{stem}_{j:04}.vtk"));
        write_vtk_file(
            &path,
            &format!("{stem} time node {j}"),
            mesh,
            Some(&d),
            &[PointVectors { name: "displacement", values: &d }, PointVectors { name: "velocity", values: &v }],
        )?;
        written.push(path);
    }
    Ok(written)
}

/// Per-node CSV `node,x,y,u_x,u_y,v_x,v_y` of free-DOF displacement and velocity.
pub fn write_state_csv<T: Scalar, W: Write>(
    out: W,
    mesh: &Mesh<T>,
    dofmap: &DofMap,
    displacement: &[T],
    velocity: &[T],
) -> std::result::Result<(), csv::Error> {
    let d = dofmap.expand(displacement);
    let v = dofmap.expand(velocity);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "x", "y", "u_x", "u_y", "v_x", "v_y"])?;
    for (i, p) in mesh.nodes().iter().enumerate() {
        w.write_record(&[
            i.to_string(),
            p[0].to_string(),
            p[1].to_string(),
            d[2 * i].to_string(),
            d[2 * i + 1].to_string(),
            v[2 * i].to_string(),
            v[2 * i + 1].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// [`write_state_csv`] for time node `j` of a history to a file.
pub fn write_state_csv_file<T: Scalar>(
    path: &Path,
    mesh: &Mesh<T>,
    dofmap: &DofMap,
    history: &StateHistory<T>,
    j: usize,
) -> Result<()> {
    let Some(d) = history.displacements.get(j) else {
        return Err(Error::InvalidTimeGrid(format!("time node {j} not in history")));
    };
    let zero = vec![T::zero(); dofmap.n_free()];
    let v = if j == 0 { &zero[..] } else { history.velocity(j) };
    let w = create(path)?;
    write_state_csv(w, mesh, dofmap, d, v).map_err(|source| Error::Csv { path: path.into(), source })
}

/// Writes `rows` under `header` as CSV.
pub fn write_csv_file<S: AsRef<str>>(path: &Path, header: &[&str], rows: &[Vec<S>]) -> Result<()> {
    let wrap = |source| Error::Csv { path: path.into(), source };
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r.iter().map(|s| s.as_ref())).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_text_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
