//! Named input pairs used by the test suites and examples.

use std::f64::consts::FRAC_PI_2;

use crate::geometry::{Point3, Source, TriMesh};
use crate::shapes;

fn pair(a: TriMesh, b: TriMesh) -> (TriMesh, TriMesh) {
    (a.with_source(Source::A), b.with_source(Source::B))
}

/// Two unit cubes offset by (0.5, 0.5, 0.5).
pub fn cube_cube() -> (TriMesh, TriMesh) {
    let p = Point3::new;
    pair(shapes::box_fan(p(0., 0., 0.), p(1., 1., 1.)), shapes::box_fan(p(0.5, 0.5, 0.5), p(1.5, 1.5, 1.5)))
}

/// Cube whose six faces are each pierced by a slightly larger sphere.
pub fn cube_sphere() -> (TriMesh, TriMesh) {
    let p = Point3::new;
    pair(
        shapes::box_grid(p(-1., -1., -1.), p(1., 1., 1.), 4),
        shapes::rotated(&shapes::icosphere(1.2, 3), p(0.3, 0.7, 0.2), 0.61),
    )
}

/// Two equal-radius cylinders crossing at right angles.
pub fn crossed_cylinders() -> (TriMesh, TriMesh) {
    pair(
        shapes::cylinder_x(1.0, 2.0, 16, 3),
        shapes::rotated(&shapes::cylinder_x(1.0, 2.0, 12, 3), Point3::new(0., 0., 1.), FRAC_PI_2),
    )
}

/// Two equal tori, the second stood upright and shifted along x.
pub fn tori() -> (TriMesh, TriMesh) {
    pair(
        shapes::torus(1.0, 0.45, 48, 24, 0.1),
        shapes::rotated(&shapes::torus(1.0, 0.45, 48, 24, 0.2), Point3::new(1., 0., 0.), FRAC_PI_2)
            .translated(Point3::new(0.8, 0., 0.)),
    )
}

/// Closed three-legged blob cut by an open horizontal sheet.
pub fn blob_plane() -> (TriMesh, TriMesh) {
    pair(shapes::three_lobe_blob(4), shapes::plane_grid(3.0, 12, -0.8))
}

/// Open V and W sheets over the same depth, crossing along four lines.
pub fn vee_wee() -> (TriMesh, TriMesh) {
    pair(
        shapes::extruded_polyline(&[(-2.5, 1.0), (0.0, 0.0), (2.5, 1.0)], 2.0, 3, 4),
        shapes::extruded_polyline(&[(-2.0, 1.0), (-1.0, -1.0), (0.0, 1.0), (1.0, -1.0), (2.0, 1.0)], 2.0, 4, 5),
    )
}

/// Every closed-closed fixture by name.
pub fn closed_pairs() -> Vec<(&'static str, (TriMesh, TriMesh))> {
    vec![
        ("cube_cube", cube_cube()),
        ("cube_sphere", cube_sphere()),
        ("crossed_cylinders", crossed_cylinders()),
        ("tori", tori()),
    ]
}
