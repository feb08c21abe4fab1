//! Small fixed-size geometry helpers shared by the mesh and element code.

use nalgebra::{Matrix3, Vector3};

pub type Point = Vector3<f64>;

/// Signed volume of the tetrahedron `(a, b, c, d)`; positive when `d` lies on
/// the side of `(a, b, c)` given by the right-hand rule.
pub fn signed_volume(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    (b - a).dot(&(c - a).cross(&(d - a))) / 6.0
}

/// Gradients of the four barycentric coordinates of a tetrahedron together
/// with its signed volume. `None` if the tetrahedron is flat.
pub fn barycentric_gradients(p: &[Point; 4]) -> Option<([Point; 4], f64)> {
    let jac = Matrix3::from_columns(&[p[1] - p[0], p[2] - p[0], p[3] - p[0]]);
    let det = jac.determinant();
    if det.abs() <= f64::EPSILON * (p[1] - p[0]).norm().powi(3) {
        return None;
    }
    let inv_t = jac.try_inverse()?.transpose();
    let g1 = inv_t.column(0).into_owned();
    let g2 = inv_t.column(1).into_owned();
    let g3 = inv_t.column(2).into_owned();
    let g0 = -(g1 + g2 + g3);
    Some(([g0, g1, g2, g3], det / 6.0))
}

pub fn centroid(points: &[Point]) -> Point {
    let sum = points.iter().fold(Point::zeros(), |acc, p| acc + p);
    sum / points.len() as f64
}
