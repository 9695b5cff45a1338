use std::collections::HashSet;

use meshbool::geometry::{is_closed_manifold, Point3, Source, TriMesh};
use meshbool::intersect::intersect_all;
use meshbool::merge::{clear_topology, weld_intersection, SplitSurface};
use meshbool::octree::{find_candidates, OctreeConfig};
use meshbool::retriangulate::split_surface;
use meshbool::shapes;

fn split_both(a: &TriMesh, b: &TriMesh) -> (SplitSurface, SplitSurface, usize) {
    let (region, pairs) = find_candidates(a, b, OctreeConfig::default()).unwrap();
    let side = region.root.max_extent();
    let rep = intersect_all(a, b, &pairs, 1e-12 * side, 2).unwrap();
    let w = weld_intersection(a, b, &rep, 1e-9 * side);
    let mut out = Vec::new();
    for m in [a, b] {
        let mut s = split_surface(m, &w);
        let normals: Vec<Point3> = m.triangles.iter().map(|t| {
            let c = m.corners(t);
            (c[1] - c[0]).cross(c[2] - c[0])
        }).collect();
        clear_topology(&mut s, &w.points, &normals, w.tol).unwrap();
        out.push(s);
    }
    for s in &out {
        let edges: HashSet<(usize, usize)> = s.triangles.iter().flat_map(|t| t.edges()).collect();
        for c in &w.chords {
            assert!(edges.contains(&(c.p, c.q)) || edges.contains(&(c.q, c.p)), "chord {c:?} missing on {:?}", s.source);
        }
    }
    let n = w.chords.len();
    let b_split = out.pop().unwrap();
    (out.pop().unwrap(), b_split, n)
}

fn check(a: TriMesh, b: TriMesh) {
    let (sa, sb, n) = split_both(&a, &b);
    assert!(n > 0);
    assert!(is_closed_manifold(&sa.triangles), "A split not manifold");
    assert!(is_closed_manifold(&sb.triangles), "B split not manifold");
}

#[test]
fn cube_cube_split_is_manifold() {
    let a = shapes::box_fan(Point3::new(0., 0., 0.), Point3::new(1., 1., 1.));
    let b = shapes::box_fan(Point3::new(0.5, 0.5, 0.5), Point3::new(1.5, 1.5, 1.5)).with_source(Source::B);
    check(a, b);
}

#[test]
fn cube_sphere_split_is_manifold() {
    let a = shapes::box_grid(Point3::new(-1., -1., -1.), Point3::new(1., 1., 1.), 4);
    let b = shapes::rotated(&shapes::icosphere(1.2, 3), Point3::new(0.3, 0.7, 0.2), 0.61).with_source(Source::B);
    check(a, b);
}

#[test]
fn crossed_cylinders_split_is_manifold() {
    let a = shapes::cylinder_x(1.0, 2.0, 16, 3);
    let b = shapes::rotated(&shapes::cylinder_x(1.0, 2.0, 12, 3), Point3::new(0., 0., 1.), std::f64::consts::FRAC_PI_2)
        .with_source(Source::B);
    check(a, b);
}
