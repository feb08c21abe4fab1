//! Export of the reconstructed interface.

use std::io::{self, Write};

use crate::cutting::TriangleSurface;

pub fn write_vtk(w: &mut impl Write, surface: &TriangleSurface, title: &str) -> io::Result<()> {
    super::vtk::write_polydata(w, title, &surface.vertices, &surface.triangles)
}

/// Wavefront-style text: `v x y z` lines, then 1-based `f a b c` lines.
pub fn write_obj(w: &mut impl Write, surface: &TriangleSurface) -> io::Result<()> {
    for p in &surface.vertices {
        writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
    }
    for t in &surface.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn obj_is_one_based() {
        let s = TriangleSurface {
            node_ids: vec![10, 11, 12],
            vertices: vec![Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)],
            triangles: vec![[0, 1, 2]],
        };
        let mut buf = Vec::new();
        write_obj(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
        let mut buf = Vec::new();
        write_vtk(&mut buf, &s, "s").unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("POLYGONS 1 4\n3 0 1 2\n"));
    }
}
