//! Procedural test surfaces: boxes, spheres, prisms, tori and open sheets.
//!
//! Closed generators always return outward-oriented meshes.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::geometry::{signed_volume_unchecked, Point3, Source, TriMesh};

fn closed_outward(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> TriMesh {
    let mut m = TriMesh::new(vertices, &faces, Source::A);
    if signed_volume_unchecked(&m.vertices, &m.triangles) < 0.0 {
        m = m.reversed();
    }
    m
}

/// Unit cube [0,1]^3 with the minimal 8 vertices / 12 triangles.
pub fn unit_cube_12() -> TriMesh {
    let v = (0..8)
        .map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let f = vec![
        [0, 2, 1], [1, 2, 3], // z = 0
        [4, 5, 6], [5, 7, 6], // z = 1
        [0, 1, 4], [1, 5, 4], // y = 0
        [2, 6, 3], [3, 6, 7], // y = 1
        [0, 4, 2], [2, 4, 6], // x = 0
        [1, 3, 5], [3, 7, 5], // x = 1
    ];
    closed_outward(v, f)
}

/// Axis-aligned box whose faces are fanned from an off-centre interior point
/// at local coordinates (0.3, 0.6). No face-internal edge passes through the
/// face centre.
pub fn box_fan(min: Point3, max: Point3) -> TriMesh {
    let mut verts: Vec<Point3> = Vec::new();
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut id = |p: Point3, verts: &mut Vec<Point3>| -> usize {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        *index.entry(key).or_insert_with(|| {
            verts.push(p);
            verts.len() - 1
        })
    };
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let mut faces = Vec::new();
    for axis in 0..3 {
        let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in 0..2 {
            let c = if side == 0 { min[axis] } else { max[axis] };
            let at = |s: f64, t: f64| {
                let mut p = [0.0; 3];
                p[axis] = c;
                p[u] = lerp(min[u], max[u], s);
                p[w] = lerp(min[w], max[w], t);
                Point3::from(p)
            };
            let corners = [at(0., 0.), at(1., 0.), at(1., 1.), at(0., 1.)];
            let ci: Vec<usize> = corners.iter().map(|&p| id(p, &mut verts)).collect();
            let centre = id(at(0.3, 0.6), &mut verts);
            for k in 0..4 {
                let (a, b) = (ci[k], ci[(k + 1) % 4]);
                // (u, w, axis) is right-handed, so this winding faces +axis.
                if side == 1 {
                    faces.push([centre, a, b]);
                } else {
                    faces.push([centre, b, a]);
                }
            }
        }
    }
    closed_outward(verts, faces)
}

/// Axis-aligned box with every face split into an `n` x `n` grid of quads.
pub fn box_grid(min: Point3, max: Point3, n: usize) -> TriMesh {
    let n = n.max(1);
    let mut verts: Vec<Point3> = Vec::new();
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut faces = Vec::new();
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    for axis in 0..3 {
        let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in 0..2 {
            let c = if side == 0 { min[axis] } else { max[axis] };
            let mut grid = vec![vec![0usize; n + 1]; n + 1];
            for (i, row) in grid.iter_mut().enumerate() {
                for (j, slot) in row.iter_mut().enumerate() {
                    let mut p = [0.0; 3];
                    p[axis] = c;
                    p[u] = lerp(min[u], max[u], i as f64 / n as f64);
                    p[w] = lerp(min[w], max[w], j as f64 / n as f64);
                    let p = Point3::from(p);
                    let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
                    *slot = *index.entry(key).or_insert_with(|| {
                        verts.push(p);
                        verts.len() - 1
                    });
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let (a, b, c2, d) = (grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]);
                    if side == 1 {
                        faces.push([a, b, c2]);
                        faces.push([a, c2, d]);
                    } else {
                        faces.push([a, c2, b]);
                        faces.push([a, d, c2]);
                    }
                }
            }
        }
    }
    closed_outward(verts, faces)
}

/// Icosphere centred at the origin; `subdiv` levels of 4-way splitting
/// (20 * 4^subdiv triangles).
pub fn icosphere(radius: f64, subdiv: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point3> = [
        (-1., t, 0.), (1., t, 0.), (-1., -t, 0.), (1., -t, 0.),
        (0., -1., t), (0., 1., t), (0., -1., -t), (0., 1., -t),
        (t, 0., -1.), (t, 0., 1.), (-t, 0., -1.), (-t, 0., 1.),
    ]
    .iter()
    .map(|&(x, y, z)| Point3::new(x, y, z).normalized())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdiv {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Point3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalized());
                verts.len() - 1
            })
        };
        for f in &faces {
            let ab = midpoint(f[0], f[1], &mut verts);
            let bc = midpoint(f[1], f[2], &mut verts);
            let ca = midpoint(f[2], f[0], &mut verts);
            next.extend_from_slice(&[[f[0], ab, ca], [f[1], bc, ab], [f[2], ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in &mut verts {
        *v = *v * radius;
    }
    closed_outward(verts, faces)
}

/// Capped prism approximating a cylinder of `radius` along the x axis,
/// spanning x in [-half_len, half_len]. The cross-section polygon has
/// `segments` vertices (even) with one vertex at the top (+z) and one at the
/// bottom (-z); the side is split into `len_segments` slabs.
pub fn cylinder_x(radius: f64, half_len: f64, segments: usize, len_segments: usize) -> TriMesh {
    let n = segments.max(3);
    let m = len_segments.max(1);
    let ring = |k: usize| {
        let a = PI / 2.0 + 2.0 * PI * k as f64 / n as f64;
        let (mut s, mut c) = a.sin_cos();
        // Snap the exact quarter angles so the top and bottom lie on z = +-r.
        if (4 * k).is_multiple_of(n) {
            let q = 4 * k / n;
            (s, c) = match q % 4 {
                0 => (1.0, 0.0),
                1 => (0.0, -1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, 1.0),
            };
        }
        (radius * c, radius * s)
    };
    let mut verts = Vec::new();
    for j in 0..=m {
        let x = -half_len + 2.0 * half_len * j as f64 / m as f64;
        for k in 0..n {
            let (y, z) = ring(k);
            verts.push(Point3::new(x, y, z));
        }
    }
    let idx = |j: usize, k: usize| j * n + (k % n);
    let mut faces = Vec::new();
    for j in 0..m {
        for k in 0..n {
            let (a, b, c, d) = (idx(j, k), idx(j, k + 1), idx(j + 1, k + 1), idx(j + 1, k));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    let c0 = verts.len();
    verts.push(Point3::new(-half_len, 0.0, 0.0));
    let c1 = verts.len();
    verts.push(Point3::new(half_len, 0.0, 0.0));
    for k in 0..n {
        faces.push([c0, idx(0, k + 1), idx(0, k)]);
        faces.push([c1, idx(m, k), idx(m, k + 1)]);
    }
    closed_outward(verts, faces)
}

/// Torus around the z axis with major radius `major` and tube radius `minor`.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize, phase: f64) -> TriMesh {
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64 + phase;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64 + 0.5 * phase;
            let r = major + minor * v.cos();
            verts.push(Point3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::new();
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    closed_outward(verts, faces)
}

/// Open square sheet [-half, half]^2 at height `z`, normal +z.
pub fn plane_grid(half: f64, n: usize, z: f64) -> TriMesh {
    let n = n.max(1);
    let mut verts = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let x = -half + 2.0 * half * i as f64 / n as f64;
            let y = -half + 2.0 * half * j as f64 / n as f64;
            verts.push(Point3::new(x, y, z));
        }
    }
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let mut faces = Vec::new();
    for i in 0..n {
        for j in 0..n {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(verts, &faces, Source::A)
}

/// Open sheet obtained by sweeping an xz polyline along y in [0, depth].
/// Every polyline segment is split into `seg_split` pieces and the sweep into
/// `depth_segments` slabs.
pub fn extruded_polyline(profile: &[(f64, f64)], depth: f64, seg_split: usize, depth_segments: usize) -> TriMesh {
    let mut pts = Vec::new();
    for w in profile.windows(2) {
        let ((x0, z0), (x1, z1)) = (w[0], w[1]);
        for s in 0..seg_split.max(1) {
            let t = s as f64 / seg_split.max(1) as f64;
            pts.push((x0 + (x1 - x0) * t, z0 + (z1 - z0) * t));
        }
    }
    pts.push(*profile.last().expect("non-empty profile"));
    let cols = pts.len();
    let rows = depth_segments.max(1);
    let mut verts = Vec::new();
    for r in 0..=rows {
        let y = depth * r as f64 / rows as f64;
        for &(x, z) in &pts {
            verts.push(Point3::new(x, y, z));
        }
    }
    let idx = |r: usize, c: usize| r * cols + c;
    let mut faces = Vec::new();
    for r in 0..rows {
        for c in 0..cols - 1 {
            let (a, b, cc, d) = (idx(r, c), idx(r, c + 1), idx(r + 1, c + 1), idx(r + 1, c));
            faces.push([a, cc, b]);
            faces.push([a, d, cc]);
        }
    }
    TriMesh::new(verts, &faces, Source::A)
}

/// Closed star-shaped blob with three lobes reaching downward, built by
/// radially displacing an icosphere.
pub fn three_lobe_blob(subdiv: usize) -> TriMesh {
    let base = icosphere(1.0, subdiv);
    let legs: Vec<Point3> = (0..3)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / 3.0 + 0.35;
            Point3::new(a.cos(), a.sin(), -0.8).normalized()
        })
        .collect();
    let verts = base
        .vertices
        .iter()
        .map(|&d| {
            let lobes: f64 = legs.iter().map(|l| d.dot(*l).max(0.0).powi(8)).sum();
            d * (0.6 + 1.0 * lobes)
        })
        .collect();
    closed_outward(verts, base.faces())
}

/// Rotation of every vertex about a unit axis through the origin.
pub fn rotated(mesh: &TriMesh, axis: Point3, angle: f64) -> TriMesh {
    let k = axis.normalized();
    let (s, c) = angle.sin_cos();
    let mut m = mesh.clone();
    for v in &mut m.vertices {
        let p = *v;
        *v = p * c + k.cross(p) * s + k * (k.dot(p) * (1.0 - c));
    }
    m
}

/// Componentwise scaling about the origin; flips winding if the scale is
/// orientation reversing.
pub fn scaled(mesh: &TriMesh, s: Point3) -> TriMesh {
    let mut m = mesh.clone();
    for v in &mut m.vertices {
        *v = Point3::new(v.x * s.x, v.y * s.y, v.z * s.z);
    }
    if s.x * s.y * s.z < 0.0 {
        m = m.reversed();
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{euler_characteristic, is_closed_manifold, signed_volume};

    #[test]
    fn closed_generators_are_outward_manifolds() {
        let meshes = [
            box_fan(Point3::ZERO, Point3::new(1., 1., 1.)),
            box_grid(Point3::ZERO, Point3::new(1., 2., 3.), 3),
            icosphere(1.0, 2),
            cylinder_x(1.0, 2.0, 16, 3),
            torus(1.0, 0.3, 24, 12, 0.1),
            three_lobe_blob(3),
        ];
        for m in &meshes {
            assert!(m.closed);
            assert!(is_closed_manifold(&m.triangles));
            assert!(signed_volume(m).unwrap() > 0.0);
        }
        assert_eq!(euler_characteristic(&meshes[4].triangles), 0);
        assert_eq!(euler_characteristic(&meshes[3].triangles), 2);
    }

    #[test]
    fn box_volumes_are_exact() {
        let b = box_fan(Point3::ZERO, Point3::new(1., 1., 1.));
        assert!((signed_volume(&b).unwrap() - 1.0).abs() < 1e-15);
        let g = box_grid(Point3::ZERO, Point3::new(1., 2., 3.), 3);
        assert!((signed_volume(&g).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn open_sheets_have_one_boundary() {
        let p = plane_grid(1.0, 4, 0.0);
        assert!(!p.closed);
        assert_eq!(p.boundary_loops.len(), 1);
        let v = extruded_polyline(&[(-1.0, 1.0), (0.0, -1.0), (1.0, 1.0)], 2.0, 2, 3);
        assert_eq!(v.boundary_loops.len(), 1);
        // Normal of the first face of the plane points up.
        let t = &p.triangles[0];
        let [a, b, c] = p.corners(t);
        assert!(crate::geometry::tri_normal(a, b, c).z > 0.0);
    }
}
