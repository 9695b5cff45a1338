//! Point-in-solid tests by ray parity.

use crate::geometry::{Point3, TriMesh, Triangle};

/// Fixed, deliberately irrational-looking ray directions; later ones are
/// used when a ray grazes an edge or vertex.
const DIRECTIONS: [[f64; 3]; 6] = [
    [0.577350269189626, 0.577350269189625, 0.577350269189626],
    [0.2672612419124244, -0.5345224838248488, 0.8017837257372732],
    [-0.7071067811865475, 0.1414213562373095, 0.6928203230275509],
    [0.9128709291752769, 0.3651483716701107, -0.1825741858350554],
    [-0.3333333333333333, -0.6666666666666666, -0.6666666666666667],
    [0.1104315261719006, 0.9938837346736189, 0.0],
];

enum Crossing {
    Miss,
    Hit,
    Ambiguous,
}

fn ray_triangle(o: Point3, d: Point3, a: Point3, b: Point3, c: Point3, eps: f64) -> Crossing {
    let e1 = b - a;
    let e2 = c - a;
    let p = d.cross(e2);
    let det = e1.dot(p);
    let scale = e1.norm() * e2.norm();
    if det.abs() <= 1e-14 * scale {
        return Crossing::Miss;
    }
    let inv = 1.0 / det;
    let s = o - a;
    let u = s.dot(p) * inv;
    let q = s.cross(e1);
    let v = d.dot(q) * inv;
    let t = e2.dot(q) * inv;
    let w = 1.0 - u - v;
    let near = |x: f64| x.abs() <= eps;
    if near(u) || near(v) || near(w) {
        if u >= -eps && v >= -eps && w >= -eps && t > -eps {
            return Crossing::Ambiguous;
        }
        return Crossing::Miss;
    }
    if u < 0.0 || v < 0.0 || w < 0.0 {
        return Crossing::Miss;
    }
    if t.abs() <= eps * scale.sqrt().max(1.0) {
        return Crossing::Ambiguous;
    }
    if t > 0.0 {
        Crossing::Hit
    } else {
        Crossing::Miss
    }
}

/// Whether `p` lies inside the closed triangle soup. Rays that graze edges
/// are retried along other directions; if every direction is ambiguous the
/// first direction's count is used.
pub fn point_inside(p: Point3, vertices: &[Point3], tris: &[Triangle]) -> bool {
    let mut fallback = None;
    for d in DIRECTIONS {
        let d = Point3::from(d);
        let mut count = 0usize;
        let mut ambiguous = false;
        for t in tris {
            match ray_triangle(p, d, vertices[t.v[0]], vertices[t.v[1]], vertices[t.v[2]], 1e-10) {
                Crossing::Hit => count += 1,
                Crossing::Miss => {}
                Crossing::Ambiguous => {
                    ambiguous = true;
                    count += 1;
                }
            }
        }
        if !ambiguous {
            return count % 2 == 1;
        }
        fallback.get_or_insert(count % 2 == 1);
    }
    fallback.unwrap_or(false)
}

pub fn point_in_mesh(p: Point3, mesh: &TriMesh) -> bool {
    point_inside(p, &mesh.vertices, &mesh.triangles)
}

/// Majority vote of `inner`'s triangle centroids against `outer`.
pub fn mesh_inside(inner: &TriMesh, outer: &TriMesh) -> bool {
    let step = (inner.triangles.len() / 7).max(1);
    let mut votes = (0, 0);
    for t in inner.triangles.iter().step_by(step).take(7) {
        let c = inner.corners(t);
        let centroid = (c[0] + c[1] + c[2]) / 3.0;
        if point_in_mesh(centroid, outer) {
            votes.0 += 1;
        } else {
            votes.1 += 1;
        }
    }
    votes.0 > votes.1
}
