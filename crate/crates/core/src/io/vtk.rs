//! Legacy-VTK ASCII writers for the hybrid mesh and the macro mesh.
//!
//! Octahedra are written as their eight split tetrahedra around an extra
//! center point whose field value is the average of the six octahedron
//! nodes, which is exactly the value the averaged basis assigns there.

use std::io::{self, Write};

use crate::cutting::{HybridMesh, Region, OCTA_SPLIT};
use crate::geometry::Point;
use crate::mesh::MacroMesh;

const VTK_TETRA: u8 = 10;

fn header(w: &mut impl Write, title: &str, dataset: &str) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET {dataset}")
}

fn points(w: &mut impl Write, pts: &[Point]) -> io::Result<()> {
    writeln!(w, "POINTS {} double", pts.len())?;
    for p in pts {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}

fn tets(w: &mut impl Write, cells: &[[usize; 4]]) -> io::Result<()> {
    writeln!(w, "CELLS {} {}", cells.len(), 5 * cells.len())?;
    for c in cells {
        writeln!(w, "4 {} {} {} {}", c[0], c[1], c[2], c[3])?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for _ in cells {
        writeln!(w, "{VTK_TETRA}")?;
    }
    Ok(())
}

/// Points and tetrahedra of the exported hybrid mesh: the mesh nodes, then
/// one center per octahedron.
pub fn export_geometry(hm: &HybridMesh) -> (Vec<Point>, Vec<[usize; 4]>) {
    let nn = hm.num_nodes();
    let mut pts = hm.node_coords.clone();
    let mut cells = hm.sub_tets.clone();
    for (o, octa) in hm.octas.iter().enumerate() {
        pts.push(hm.octa_coords_with_center(o)[6]);
        let local: [usize; 7] = std::array::from_fn(|k| if k < 6 { octa[k] } else { nn + o });
        cells.extend(OCTA_SPLIT.iter().map(|s| s.map(|k| local[k])));
    }
    (pts, cells)
}

/// Nodal vector field extended to the exported octahedron centers.
pub fn export_field(hm: &HybridMesh, u: &[f64]) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = u.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    for octa in &hm.octas {
        let mut avg = [0.0; 3];
        for n in octa {
            for c in 0..3 {
                avg[c] += u[3 * n + c];
            }
        }
        out.push(avg.map(|v| v / 6.0));
    }
    out
}

/// Writes the hybrid mesh with an optional nodal vector field `u` (three
/// components per scalar node) and the region of every cell.
pub fn write_hybrid_mesh(
    w: &mut impl Write,
    hm: &HybridMesh,
    u: Option<&[f64]>,
    title: &str,
) -> io::Result<()> {
    if let Some(u) = u {
        if u.len() != 3 * hm.num_nodes() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("field has {} values for {} nodes", u.len(), hm.num_nodes()),
            ));
        }
    }
    let (pts, cells) = export_geometry(hm);
    header(w, title, "UNSTRUCTURED_GRID")?;
    points(w, &pts)?;
    tets(w, &cells)?;
    if pts.is_empty() {
        return Ok(());
    }
    if let Some(u) = u {
        writeln!(w, "POINT_DATA {}", pts.len())?;
        writeln!(w, "VECTORS u double")?;
        for v in export_field(hm, u) {
            writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
        }
    }
    writeln!(w, "CELL_DATA {}", cells.len())?;
    writeln!(w, "SCALARS inside int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    let flag = |r: &Region| u8::from(*r == Region::Inside);
    for r in &hm.tet_region {
        writeln!(w, "{}", flag(r))?;
    }
    for r in &hm.octa_region {
        for _ in 0..OCTA_SPLIT.len() {
            writeln!(w, "{}", flag(r))?;
        }
    }
    Ok(())
}

pub fn write_macro_mesh(w: &mut impl Write, mesh: &MacroMesh) -> io::Result<()> {
    header(w, "macro mesh", "UNSTRUCTURED_GRID")?;
    points(w, mesh.vertices())?;
    tets(w, mesh.macro_tets())
}

pub(crate) fn write_polydata(
    w: &mut impl Write,
    title: &str,
    pts: &[Point],
    tris: &[[usize; 3]],
) -> io::Result<()> {
    header(w, title, "POLYDATA")?;
    points(w, pts)?;
    writeln!(w, "POLYGONS {} {}", tris.len(), 4 * tris.len())?;
    for t in tris {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutting::{compute_cut, subdivide, CutOptions};
    use crate::geometry::signed_volume;
    use crate::level_set::LevelSet;

    #[test]
    fn empty_mesh_is_header_only() {
        let mut buf = Vec::new();
        write_hybrid_mesh(&mut buf, &HybridMesh::empty(), Some(&[]), "empty").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\nempty\nASCII\nDATASET UNSTRUCTURED_GRID\n"));
        assert!(text.contains("POINTS 0 double"));
        assert!(text.contains("CELLS 0 0"));
        assert!(!text.contains("POINT_DATA"));
    }

    #[test]
    fn single_cube_export_counts() {
        let mesh = MacroMesh::build(1).unwrap();
        let ls = LevelSet::moving_sphere(Point::new(5.0, 5.0, 5.0), 0.1, Point::zeros()).unwrap();
        let cut = compute_cut(&mesh, &ls, 0.0, CutOptions::default()).unwrap();
        let hm = subdivide(&mesh, &cut, &ls).unwrap();
        let (pts, cells) = export_geometry(&hm);
        assert_eq!(cells.len(), 6 * (4 + 8));
        assert_eq!(pts.len(), 8 + 19 + 6);
        let vol: f64 = cells
            .iter()
            .map(|c| signed_volume(&pts[c[0]], &pts[c[1]], &pts[c[2]], &pts[c[3]]))
            .sum();
        assert!((vol - 1.0).abs() < 1e-14);

        let u: Vec<f64> = (0..3 * hm.num_nodes()).map(|i| i as f64).collect();
        let mut buf = Vec::new();
        write_hybrid_mesh(&mut buf, &hm, Some(&u), "t").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("CELLS 72 360"));
        assert!(text.contains("POINT_DATA 33"));
        assert!(write_hybrid_mesh(&mut Vec::new(), &hm, Some(&u[1..]), "t").is_err());
    }
}
