//! Narrow phase: exact-as-possible triangle/triangle intersection with
//! a symbolic key for every segment endpoint.
//!
//! Endpoints that are crossings of an edge with the other triangle's plane
//! are always evaluated from the edge's lower-indexed vertex, so two pairs
//! sharing that edge and plane produce bitwise identical points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Source, TriMesh, Triangle};
use crate::octree::CandidatePair;

/// Where a segment endpoint comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointKey {
    /// An input vertex lying on the other triangle's plane.
    Vertex { surface: Source, vertex: usize },
    /// Edge `(lo, hi)` of `surface` crossing the plane of triangle `other`
    /// of the opposite surface.
    Edge { surface: Source, lo: usize, hi: usize, other: usize },
}

impl PointKey {
    pub fn surface(&self) -> Source {
        match *self {
            PointKey::Vertex { surface, .. } | PointKey::Edge { surface, .. } => surface,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSegment {
    pub tri_a: usize,
    pub tri_b: usize,
    pub p: Point3,
    pub q: Point3,
    pub key_p: PointKey,
    pub key_q: PointKey,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairOutcome {
    None,
    Segment(IntersectionSegment),
    /// Both triangles lie in one plane.
    Coplanar,
    /// The triangles only touch in a point or the overlap is below tolerance.
    Degenerate,
}

#[derive(Clone, Debug, Default)]
pub struct IntersectReport {
    /// Sorted by `(tri_a, tri_b)`.
    pub segments: Vec<IntersectionSegment>,
    pub coplanar: Vec<CandidatePair>,
    pub degenerate: usize,
}

fn is_degenerate(c: &[Point3; 3]) -> bool {
    let n = (c[1] - c[0]).cross(c[2] - c[0]).norm();
    let l = (c[1] - c[0]).norm2().max((c[2] - c[1]).norm2()).max((c[0] - c[2]).norm2());
    !(n > f64::EPSILON * l)
}

struct Side {
    /// (projection on the intersection line, point, key)
    pts: Vec<(f64, Point3, PointKey)>,
}

enum PlaneSplit {
    Apart,
    InPlane,
    Touch(Side),
}

/// Portion of triangle `t` (from `mesh`) lying on the plane of the other triangle.
fn split_by_plane(mesh: &TriMesh, t: &Triangle, n: Point3, p0: Point3, other: usize, eps: f64, dir: Point3) -> PlaneSplit {
    let c = mesh.corners(t);
    let tol = eps * n.norm();
    let mut d = [0.0; 3];
    for k in 0..3 {
        let v = n.dot(c[k] - p0);
        d[k] = if v.abs() < tol { 0.0 } else { v };
    }
    if d.iter().all(|&x| x > 0.0) || d.iter().all(|&x| x < 0.0) {
        return PlaneSplit::Apart;
    }
    if d.iter().all(|&x| x == 0.0) {
        return PlaneSplit::InPlane;
    }
    let surface = t.source;
    let mut pts = Vec::with_capacity(2);
    for k in 0..3 {
        if d[k] == 0.0 {
            pts.push((dir.dot(c[k]), c[k], PointKey::Vertex { surface, vertex: t.v[k] }));
        }
    }
    for k in 0..3 {
        let j = (k + 1) % 3;
        if d[k] * d[j] < 0.0 {
            let (u, v, du, dv, iu, iv) = if t.v[k] < t.v[j] {
                (c[k], c[j], d[k], d[j], t.v[k], t.v[j])
            } else {
                (c[j], c[k], d[j], d[k], t.v[j], t.v[k])
            };
            let p = u + (v - u) * (du / (du - dv));
            pts.push((dir.dot(p), p, PointKey::Edge { surface, lo: iu, hi: iv, other }));
        }
    }
    PlaneSplit::Touch(Side { pts })
}

fn interval(s: &Side) -> ((f64, Point3, PointKey), (f64, Point3, PointKey)) {
    let mut lo = s.pts[0];
    let mut hi = s.pts[0];
    for &p in &s.pts[1..] {
        if p.0 < lo.0 {
            lo = p;
        }
        if p.0 > hi.0 {
            hi = p;
        }
    }
    (lo, hi)
}

/// Intersects triangle `ta` of `a` with triangle `tb` of `b`.
///
/// `eps` is the length below which signed distances count as zero.
pub fn intersect_pair(a: &TriMesh, ta: usize, b: &TriMesh, tb: usize, eps: f64) -> Result<PairOutcome> {
    let (tri_a, tri_b) = (&a.triangles[ta], &b.triangles[tb]);
    let (ca, cb) = (a.corners(tri_a), b.corners(tri_b));
    if is_degenerate(&ca) {
        return Err(Error::DegenerateTriangle { surface: 'A', tri: ta });
    }
    if is_degenerate(&cb) {
        return Err(Error::DegenerateTriangle { surface: 'B', tri: tb });
    }
    let na = (ca[1] - ca[0]).cross(ca[2] - ca[0]);
    let nb = (cb[1] - cb[0]).cross(cb[2] - cb[0]);
    let dir = na.cross(nb);
    let sa = split_by_plane(a, tri_a, nb, cb[0], tb, eps, dir);
    let sa = match sa {
        PlaneSplit::Apart => return Ok(PairOutcome::None),
        PlaneSplit::InPlane => return Ok(PairOutcome::Coplanar),
        PlaneSplit::Touch(s) => s,
    };
    let sb = match split_by_plane(b, tri_b, na, ca[0], ta, eps, dir) {
        PlaneSplit::Apart => return Ok(PairOutcome::None),
        PlaneSplit::InPlane => return Ok(PairOutcome::Coplanar),
        PlaneSplit::Touch(s) => s,
    };
    let dn = dir.norm();
    if dn == 0.0 {
        // Parallel planes that both snapped to touching; treat as coplanar contact.
        return Ok(PairOutcome::Coplanar);
    }
    let (alo, ahi) = interval(&sa);
    let (blo, bhi) = interval(&sb);
    let lo = if blo.0 > alo.0 { blo } else { alo };
    let hi = if bhi.0 < ahi.0 { bhi } else { ahi };
    if hi.0 < lo.0 {
        return Ok(PairOutcome::None);
    }
    if (hi.0 - lo.0) / dn <= eps || (hi.1 - lo.1).norm() <= eps {
        return Ok(PairOutcome::Degenerate);
    }
    Ok(PairOutcome::Segment(IntersectionSegment { tri_a: ta, tri_b: tb, p: lo.1, q: hi.1, key_p: lo.2, key_q: hi.2 }))
}

/// Runs the narrow phase over every candidate pair on `threads` worker
/// threads (0 = rayon default). Output order does not depend on scheduling.
pub fn intersect_all(a: &TriMesh, b: &TriMesh, pairs: &[CandidatePair], eps: f64, threads: usize) -> Result<IntersectReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<PairOutcome>> =
        pool.install(|| pairs.par_iter().map(|p| intersect_pair(a, p.tri_a, b, p.tri_b, eps)).collect());
    let mut report = IntersectReport::default();
    for (pair, out) in pairs.iter().zip(outcomes) {
        match out? {
            PairOutcome::None => {}
            PairOutcome::Segment(s) => report.segments.push(s),
            PairOutcome::Coplanar => report.coplanar.push(*pair),
            PairOutcome::Degenerate => report.degenerate += 1,
        }
    }
    report.segments.sort_by_key(|s| (s.tri_a, s.tri_b));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Source;

    fn single(c: [[f64; 3]; 3], src: Source) -> TriMesh {
        TriMesh::new(c.iter().map(|&p| p.into()).collect(), &[[0, 1, 2]], src)
    }

    /// Independent oracle: clip the segment where `tb` meets the plane z=0
    /// against the half-planes of a triangle lying in z=0.
    fn clip_oracle(ta: [[f64; 2]; 3], tb: [[f64; 3]; 3]) -> Option<([f64; 2], [f64; 2])> {
        let mut pts = Vec::new();
        for k in 0..3 {
            let (u, v) = (tb[k], tb[(k + 1) % 3]);
            if (u[2] < 0.0) != (v[2] < 0.0) {
                let s = u[2] / (u[2] - v[2]);
                pts.push([u[0] + s * (v[0] - u[0]), u[1] + s * (v[1] - u[1])]);
            }
        }
        let (mut p, mut q) = (pts[0], pts[1]);
        for k in 0..3 {
            let (e0, e1) = (ta[k], ta[(k + 1) % 3]);
            let side = |x: [f64; 2]| (e1[0] - e0[0]) * (x[1] - e0[1]) - (e1[1] - e0[1]) * (x[0] - e0[0]);
            let (sp, sq) = (side(p), side(q));
            if sp < 0.0 && sq < 0.0 {
                return None;
            }
            if sp < 0.0 || sq < 0.0 {
                let s = sp / (sp - sq);
                let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
                if sp < 0.0 {
                    p = x;
                } else {
                    q = x;
                }
            }
        }
        Some((p, q))
    }

    #[test]
    fn crossing_pair_matches_oracle() {
        let ta = [[-1., -1., 0.], [2., -1., 0.], [-1., 2., 0.]];
        let tb = [[0., 0., -1.], [1., 0., -1.], [0.5, 0., 2.]];
        let a = single(ta, Source::A);
        let b = single(tb, Source::B);
        let out = intersect_pair(&a, 0, &b, 0, 1e-12).unwrap();
        let PairOutcome::Segment(s) = out else { panic!("{out:?}") };
        let (p, q) = clip_oracle([[-1., -1.], [2., -1.], [-1., 2.]], tb).unwrap();
        let (lo, hi) = if p[0] < q[0] { (p, q) } else { (q, p) };
        let (sp, sq) = if s.p.x < s.q.x { (s.p, s.q) } else { (s.q, s.p) };
        assert!((sp.x - lo[0]).abs() < 1e-12 && (sp.y - lo[1]).abs() < 1e-12 && sp.z.abs() < 1e-12);
        assert!((sq.x - hi[0]).abs() < 1e-12 && (sq.y - hi[1]).abs() < 1e-12 && sq.z.abs() < 1e-12);
        assert!((sp.x - 1.0 / 6.0).abs() < 1e-12 && (sq.x - 5.0 / 6.0).abs() < 1e-12);
        // Both endpoints come from edges of B crossing the plane of A.
        assert!(matches!(s.key_p, PointKey::Edge { surface: Source::B, .. }));
        assert!(matches!(s.key_q, PointKey::Edge { surface: Source::B, .. }));
    }

    #[test]
    fn separated_and_coplanar() {
        let ta = [[0., 0., 0.], [1., 0., 0.], [0., 1., 0.]];
        let a = single(ta, Source::A);
        let b = single([[0., 0., 1.], [1., 0., 2.], [0., 1., 3.]], Source::B);
        assert_eq!(intersect_pair(&a, 0, &b, 0, 1e-12).unwrap(), PairOutcome::None);
        let b = single([[0.2, 0.2, 0.], [1., 0.2, 0.], [0.2, 1., 0.]], Source::B);
        assert_eq!(intersect_pair(&a, 0, &b, 0, 1e-12).unwrap(), PairOutcome::Coplanar);
    }

    #[test]
    fn vertex_touch_is_degenerate() {
        let a = single([[0., 0., 0.], [1., 0., 0.], [0., 1., 0.]], Source::A);
        let b = single([[0.2, 0.2, 0.], [1., 0.2, 1.], [0.2, 1., 1.]], Source::B);
        assert_eq!(intersect_pair(&a, 0, &b, 0, 1e-12).unwrap(), PairOutcome::Degenerate);
    }

    #[test]
    fn degenerate_input_triangle() {
        let a = single([[0., 0., 0.], [1., 0., 0.], [2., 0., 0.]], Source::A);
        let b = single([[0., 0., -1.], [1., 0., 1.], [0., 1., 1.]], Source::B);
        assert!(matches!(intersect_pair(&a, 0, &b, 0, 1e-12), Err(Error::DegenerateTriangle { surface: 'A', .. })));
    }

    #[test]
    fn shared_edge_crossings_are_bitwise_equal() {
        // Two A triangles sharing edge (1,2), both pierced by the same B triangle.
        let a = TriMesh::new(
            vec![
                Point3::new(0., 0., 0.),
                Point3::new(1., 0.3, 0.1),
                Point3::new(0.2, 1., -0.05),
                Point3::new(1.3, 1.2, 0.2),
            ],
            &[[0, 1, 2], [1, 3, 2]],
            Source::A,
        );
        let b = single([[0.55, -1., -1.], [0.65, 2., -1.], [0.6, 0.5, 1.]], Source::B);
        let mut pts = Vec::new();
        for ta in 0..2 {
            if let PairOutcome::Segment(s) = intersect_pair(&a, ta, &b, 0, 1e-12).unwrap() {
                for (k, p) in [(s.key_p, s.p), (s.key_q, s.q)] {
                    if let PointKey::Edge { surface: Source::A, lo: 1, hi: 2, .. } = k {
                        pts.push(p);
                    }
                }
            }
        }
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].to_array().map(f64::to_bits), pts[1].to_array().map(f64::to_bits));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        use crate::octree::{find_candidates, OctreeConfig};
        use crate::shapes;
        let a = shapes::icosphere(1.0, 2);
        let b = shapes::rotated(&shapes::icosphere(0.9, 2), Point3::new(0.3, 0.5, 0.8), 0.4)
            .translated(Point3::new(0.7, 0.2, 0.1))
            .with_source(Source::B);
        let (_, pairs) = find_candidates(&a, &b, OctreeConfig::default()).unwrap();
        let r1 = intersect_all(&a, &b, &pairs, 1e-12, 1).unwrap();
        let r4 = intersect_all(&a, &b, &pairs, 1e-12, 4).unwrap();
        assert!(!r1.segments.is_empty());
        assert_eq!(r1.segments, r4.segments);
        assert!(r1.coplanar.is_empty());
    }
}
