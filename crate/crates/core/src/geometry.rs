//! Primitive geometric types shared by every stage of the pipeline.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Div, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (or free vector) in model space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ZERO: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Point3 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn min(self, o: Point3) -> Point3 {
        Point3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Point3) -> Point3 {
        Point3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl Index<usize> for Point3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis index {i} out of range"),
        }
    }
}

impl Add for Point3 {
    type Output = Point3;
    #[inline]
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    #[inline]
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    #[inline]
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    #[inline]
    fn div(self, s: f64) -> Point3 {
        Point3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    #[inline]
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Axis-aligned bounding box. The empty box has `min > max` on every axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn new(min: Point3, max: Point3) -> Self {
        Aabb { min, max }
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a Point3>>(pts: I) -> Self {
        let mut b = Aabb::EMPTY;
        for p in pts {
            b.grow(*p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn grow(&mut self, p: Point3) {
        self.min = self.min.min(p);
        self.max = self.max.max(p);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb::new(self.min.min(o.min), self.max.max(o.max))
    }

    /// Componentwise interval intersection; disjoint boxes give [`Aabb::EMPTY`].
    pub fn intersection(&self, o: &Aabb) -> Aabb {
        let b = Aabb::new(self.min.max(o.min), self.max.min(o.max));
        if b.is_empty() {
            Aabb::EMPTY
        } else {
            b
        }
    }

    /// Closed-interval overlap test.
    pub fn overlaps(&self, o: &Aabb) -> bool {
        !self.is_empty()
            && !o.is_empty()
            && self.min.x <= o.max.x
            && o.min.x <= self.max.x
            && self.min.y <= o.max.y
            && o.min.y <= self.max.y
            && self.min.z <= o.max.z
            && o.min.z <= self.max.z
    }

    pub fn contains_box(&self, o: &Aabb) -> bool {
        o.is_empty()
            || (self.min.x <= o.min.x
                && self.min.y <= o.min.y
                && self.min.z <= o.min.z
                && self.max.x >= o.max.x
                && self.max.y >= o.max.y
                && self.max.z >= o.max.z)
    }

    pub fn extent(&self) -> Point3 {
        if self.is_empty() {
            Point3::ZERO
        } else {
            self.max - self.min
        }
    }

    pub fn center(&self) -> Point3 {
        (self.min + self.max) * 0.5
    }

    pub fn max_extent(&self) -> f64 {
        let e = self.extent();
        e.x.max(e.y).max(e.z)
    }
}

/// Which input surface an entity comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    A,
    B,
}

impl Source {
    pub fn other(self) -> Source {
        match self {
            Source::A => Source::B,
            Source::B => Source::A,
        }
    }

    pub fn tag(self) -> char {
        match self {
            Source::A => 'A',
            Source::B => 'B',
        }
    }
}

/// A triangle referencing three vertex indices. Counter-clockwise winding
/// (seen from outside) defines the outward normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triangle {
    pub v: [usize; 3],
    pub source: Source,
    pub id: usize,
}

impl Triangle {
    pub fn new(v: [usize; 3], source: Source, id: usize) -> Self {
        Triangle { v, source, id }
    }

    pub fn is_degenerate(&self) -> bool {
        self.v[0] == self.v[1] || self.v[1] == self.v[2] || self.v[0] == self.v[2]
    }

    /// Directed edges in winding order.
    pub fn edges(&self) -> [(usize, usize); 3] {
        [(self.v[0], self.v[1]), (self.v[1], self.v[2]), (self.v[2], self.v[0])]
    }

    pub fn reversed(&self) -> Triangle {
        Triangle { v: [self.v[0], self.v[2], self.v[1]], ..*self }
    }
}

/// Unnormalized normal (twice the area vector) of three points.
#[inline]
pub fn tri_normal(a: Point3, b: Point3, c: Point3) -> Point3 {
    (b - a).cross(c - a)
}

#[inline]
pub fn tri_area(a: Point3, b: Point3, c: Point3) -> f64 {
    0.5 * tri_normal(a, b, c).norm()
}

/// Indexed triangle surface, open or closed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<Triangle>,
    pub closed: bool,
    /// Boundary cycles as ordered vertex indices, following the winding of
    /// the adjacent triangles. Empty iff the surface is closed.
    pub boundary_loops: Vec<Vec<usize>>,
}

impl TriMesh {
    /// Builds a mesh and derives `closed` and `boundary_loops` from edge degrees.
    pub fn new(vertices: Vec<Point3>, faces: &[[usize; 3]], source: Source) -> Self {
        let triangles = faces
            .iter()
            .enumerate()
            .map(|(i, f)| Triangle::new(*f, source, i))
            .collect();
        let mut m = TriMesh { vertices, triangles, closed: false, boundary_loops: Vec::new() };
        m.refresh_topology();
        m
    }

    pub fn empty() -> Self {
        TriMesh { vertices: Vec::new(), triangles: Vec::new(), closed: false, boundary_loops: Vec::new() }
    }

    /// Recomputes the `closed` flag and boundary loops.
    pub fn refresh_topology(&mut self) {
        self.boundary_loops = boundary_loops(&self.triangles);
        self.closed = !self.triangles.is_empty() && self.boundary_loops.is_empty();
    }

    pub fn faces(&self) -> Vec<[usize; 3]> {
        self.triangles.iter().map(|t| t.v).collect()
    }

    pub fn source(&self) -> Source {
        self.triangles.first().map(|t| t.source).unwrap_or(Source::A)
    }

    pub fn with_source(mut self, source: Source) -> Self {
        for t in &mut self.triangles {
            t.source = source;
        }
        self
    }

    pub fn corners(&self, t: &Triangle) -> [Point3; 3] {
        [self.vertices[t.v[0]], self.vertices[t.v[1]], self.vertices[t.v[2]]]
    }

    pub fn translated(&self, d: Point3) -> TriMesh {
        let mut m = self.clone();
        for v in &mut m.vertices {
            *v = *v + d;
        }
        m
    }

    /// Same surface with every triangle's winding reversed.
    pub fn reversed(&self) -> TriMesh {
        let mut m = self.clone();
        for t in &mut m.triangles {
            *t = t.reversed();
        }
        m.refresh_topology();
        m
    }

    /// Drops unreferenced vertices and renumbers triangles compactly.
    pub fn compacted(&self) -> TriMesh {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut verts = Vec::new();
        let mut tris = Vec::with_capacity(self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let mut v = [0usize; 3];
            for k in 0..3 {
                let old = t.v[k];
                if remap[old] == usize::MAX {
                    remap[old] = verts.len();
                    verts.push(self.vertices[old]);
                }
                v[k] = remap[old];
            }
            tris.push(Triangle::new(v, t.source, i));
        }
        let mut m = TriMesh { vertices: verts, triangles: tris, closed: false, boundary_loops: Vec::new() };
        m.refresh_topology();
        m
    }

    /// Concatenates several meshes into one (vertex indices offset).
    pub fn concat(parts: &[TriMesh]) -> TriMesh {
        let mut verts = Vec::new();
        let mut tris = Vec::new();
        for p in parts {
            let off = verts.len();
            verts.extend_from_slice(&p.vertices);
            for t in &p.triangles {
                let id = tris.len();
                tris.push(Triangle::new([t.v[0] + off, t.v[1] + off, t.v[2] + off], t.source, id));
            }
        }
        let mut m = TriMesh { vertices: verts, triangles: tris, closed: false, boundary_loops: Vec::new() };
        m.refresh_topology();
        m
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.vertices.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Geometry(format!("vertex {i} is not finite")));
            }
        }
        for t in &self.triangles {
            if t.v.iter().any(|&i| i >= self.vertices.len()) {
                return Err(Error::Geometry(format!("triangle {} references a missing vertex", t.id)));
            }
        }
        Ok(())
    }
}

/// Tight bounding box of the mesh vertices.
pub fn mesh_aabb(mesh: &TriMesh) -> Result<Aabb> {
    if mesh.vertices.is_empty() {
        return Err(Error::EmptyInput("mesh has no vertices".into()));
    }
    Ok(Aabb::from_points(&mesh.vertices))
}

pub fn aabb_intersection(a: &Aabb, b: &Aabb) -> Aabb {
    a.intersection(b)
}

/// Enclosed volume by the divergence theorem; positive for outward windings.
pub fn signed_volume(mesh: &TriMesh) -> Result<f64> {
    if !mesh.closed {
        return Err(Error::NotClosed);
    }
    Ok(signed_volume_unchecked(&mesh.vertices, &mesh.triangles))
}

pub fn signed_volume_unchecked(vertices: &[Point3], triangles: &[Triangle]) -> f64 {
    // Shift to a local origin to limit cancellation on translated inputs.
    let origin = match triangles.first() {
        Some(t) => vertices[t.v[0]],
        None => return 0.0,
    };
    let sum: f64 = triangles
        .iter()
        .map(|t| {
            let a = vertices[t.v[0]] - origin;
            let b = vertices[t.v[1]] - origin;
            let c = vertices[t.v[2]] - origin;
            a.dot(b.cross(c))
        })
        .sum();
    sum / 6.0
}

/// Directed edges of a triangle soup with their multiplicities.
pub fn directed_edge_counts(triangles: &[Triangle]) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::with_capacity(triangles.len() * 3);
    for t in triangles {
        for e in t.edges() {
            *m.entry(e).or_insert(0) += 1;
        }
    }
    m
}

/// Boundary cycles: directed edges whose reverse is absent, chained head to tail.
pub fn boundary_loops(triangles: &[Triangle]) -> Vec<Vec<usize>> {
    let counts = directed_edge_counts(triangles);
    let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut bedges: Vec<(usize, usize)> = counts
        .keys()
        .filter(|&&(u, v)| u != v && !counts.contains_key(&(v, u)))
        .copied()
        .collect();
    bedges.sort_unstable();
    for &(u, v) in &bedges {
        next.entry(u).or_default().push(v);
    }
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut loops = Vec::new();
    for &(u0, v0) in &bedges {
        if used.contains(&(u0, v0)) {
            continue;
        }
        used.insert((u0, v0));
        let mut cycle = vec![u0];
        let mut cur = v0;
        while cur != u0 {
            cycle.push(cur);
            let nxt = next
                .get(&cur)
                .and_then(|c| c.iter().copied().find(|&w| !used.contains(&(cur, w))));
            match nxt {
                Some(w) => {
                    used.insert((cur, w));
                    cur = w;
                }
                None => break,
            }
        }
        loops.push(cycle);
    }
    loops
}

/// Closed two-manifold check: every undirected edge has exactly two incident
/// triangles with opposite directed occurrences.
pub fn is_closed_manifold(triangles: &[Triangle]) -> bool {
    if triangles.is_empty() {
        return false;
    }
    if triangles.iter().any(|t| t.is_degenerate()) {
        return false;
    }
    let counts = directed_edge_counts(triangles);
    counts.iter().all(|(&(u, v), &c)| c == 1 && counts.get(&(v, u)) == Some(&1))
}

/// V - E + F over the referenced vertices.
pub fn euler_characteristic(triangles: &[Triangle]) -> i64 {
    let mut verts = HashSet::new();
    let mut edges = HashSet::new();
    for t in triangles {
        for e in t.edges() {
            verts.insert(e.0);
            edges.insert((e.0.min(e.1), e.0.max(e.1)));
        }
    }
    verts.len() as i64 - edges.len() as i64 + triangles.len() as i64
}

/// Groups triangles into edge-connected components (indices into `triangles`).
pub fn edge_connected_components(triangles: &[Triangle]) -> Vec<Vec<usize>> {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, t) in triangles.iter().enumerate() {
        for (u, v) in t.edges() {
            by_edge.entry((u.min(v), u.max(v))).or_default().push(i);
        }
    }
    let mut comp = vec![usize::MAX; triangles.len()];
    let mut out = Vec::new();
    for s in 0..triangles.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            for (u, v) in triangles[i].edges() {
                for &j in &by_edge[&(u.min(v), u.max(v))] {
                    if comp[j] == usize::MAX {
                        comp[j] = id;
                        members.push(j);
                        stack.push(j);
                    }
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn aabb_of_unit_cube() {
        let c = shapes::unit_cube_12();
        let b = mesh_aabb(&c).unwrap();
        assert_eq!(b, Aabb::new(Point3::new(0., 0., 0.), Point3::new(1., 1., 1.)));
        let t = c.translated(Point3::new(2., 0., 0.));
        assert_eq!(mesh_aabb(&t).unwrap(), Aabb::new(Point3::new(2., 0., 0.), Point3::new(3., 1., 1.)));
    }

    #[test]
    fn aabb_of_single_triangle() {
        let m = TriMesh::new(
            vec![Point3::new(0., 0., 0.), Point3::new(1., 0., 0.), Point3::new(0., 1., 0.)],
            &[[0, 1, 2]],
            Source::A,
        );
        assert_eq!(mesh_aabb(&m).unwrap(), Aabb::new(Point3::ZERO, Point3::new(1., 1., 0.)));
        assert!(!m.closed);
        assert_eq!(m.boundary_loops.len(), 1);
    }

    #[test]
    fn empty_mesh_has_no_box() {
        assert!(matches!(mesh_aabb(&TriMesh::empty()), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn box_intersections() {
        let a = Aabb::new(Point3::ZERO, Point3::new(1., 1., 1.));
        let b = Aabb::new(Point3::new(0.5, 0.5, 0.5), Point3::new(1.5, 1.5, 1.5));
        assert_eq!(a.intersection(&b), Aabb::new(Point3::new(0.5, 0.5, 0.5), Point3::new(1., 1., 1.)));
        let far = Aabb::new(Point3::new(2., 2., 2.), Point3::new(3., 3., 3.));
        assert!(a.intersection(&far).is_empty());
        assert_eq!(a.intersection(&a), a);
    }

    #[test]
    fn cube_volume_and_reversal() {
        let c = shapes::unit_cube_12();
        assert!((signed_volume(&c).unwrap() - 1.0).abs() < 1e-15);
        assert!((signed_volume(&c.reversed()).unwrap() + 1.0).abs() < 1e-15);
        assert!(is_closed_manifold(&c.triangles));
        assert_eq!(euler_characteristic(&c.triangles), 2);
    }

    #[test]
    fn open_mesh_volume_is_rejected() {
        let p = shapes::plane_grid(1.0, 2, 0.0);
        assert!(matches!(signed_volume(&p), Err(Error::NotClosed)));
    }

    #[test]
    fn icosphere_volume_matches_tetrahedron_sum() {
        // Independent oracle: explicit per-tetrahedron determinant against the centroid.
        let s = shapes::icosphere(1.0, 3);
        assert_eq!(s.triangles.len(), 1280);
        let c = s.vertices.iter().fold(Point3::ZERO, |a, &p| a + p) / s.vertices.len() as f64;
        let mut oracle = 0.0;
        for t in &s.triangles {
            let [a, b, d] = s.corners(t);
            let (a, b, d) = (a - c, b - c, d - c);
            let det = a.x * (b.y * d.z - b.z * d.y) - a.y * (b.x * d.z - b.z * d.x) + a.z * (b.x * d.y - b.y * d.x);
            oracle += det / 6.0;
        }
        let v = signed_volume(&s).unwrap();
        assert!((v - oracle).abs() < 1e-12);
        let sphere = 4.0 / 3.0 * std::f64::consts::PI;
        assert!(v < sphere && v > 0.98 * sphere);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_box() -> impl Strategy<Value = Aabb> {
            (prop::array::uniform3(-5.0f64..5.0), prop::array::uniform3(0.0f64..4.0)).prop_map(|(m, e)| {
                let min = Point3::from(m);
                Aabb::new(min, min + Point3::from(e))
            })
        }

        proptest! {
            #[test]
            fn intersection_algebra(a in arb_box(), b in arb_box(), c in arb_box()) {
                let norm = |x: Aabb| if x.is_empty() { Aabb::EMPTY } else { x };
                prop_assert_eq!(norm(a.intersection(&b)), norm(b.intersection(&a)));
                prop_assert_eq!(
                    norm(a.intersection(&b).intersection(&c)),
                    norm(a.intersection(&b.intersection(&c)))
                );
                prop_assert_eq!(a.intersection(&a), a);
            }

            #[test]
            fn volume_is_translation_invariant(t in prop::array::uniform3(-100.0f64..100.0)) {
                let s = shapes::icosphere(1.0, 2);
                let v0 = signed_volume(&s).unwrap();
                let v1 = signed_volume(&s.translated(Point3::from(t))).unwrap();
                prop_assert!((v0 - v1).abs() < 1e-9 * v0.abs());
                let vr = signed_volume(&s.reversed()).unwrap();
                prop_assert!((v0 + vr).abs() < 1e-12);
            }
        }
    }
}
