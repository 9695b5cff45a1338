//! Vertex welding and topological cleanup of the split surfaces.

use std::collections::{HashMap, HashSet};

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::geometry::{tri_normal, Point3, Source, TriMesh, Triangle};
use crate::intersect::{IntersectReport, PointKey};

/// Welds points closer than `tol`, keeping the first occurrence as the
/// representative. Returns the unique points and, for each input, its index
/// among them.
pub fn merge_points(raw: &[Point3], tol: f64) -> (Vec<Point3>, Vec<usize>) {
    let tol = if tol > 0.0 { tol } else { f64::MIN_POSITIVE };
    let cell = |p: Point3| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64, (p.z / tol).floor() as i64);
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut unique: Vec<Point3> = Vec::new();
    let mut map = Vec::with_capacity(raw.len());
    let tol2 = tol * tol;
    for &p in raw {
        let (cx, cy, cz) = cell(p);
        let mut found: Option<usize> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &i in ids {
                            if (unique[i] - p).norm2() <= tol2 && found.is_none_or(|f| i < f) {
                                found = Some(i);
                            }
                        }
                    }
                }
            }
        }
        let id = match found {
            Some(i) => i,
            None => {
                unique.push(p);
                grid.entry((cx, cy, cz)).or_default().push(unique.len() - 1);
                unique.len() - 1
            }
        };
        map.push(id);
    }
    (unique, map)
}

/// An intersection segment after welding, in unified vertex ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Chord {
    pub p: usize,
    pub q: usize,
    pub tri_a: usize,
    pub tri_b: usize,
}

/// Both surfaces and all intersection points in one welded vertex pool.
#[derive(Clone, Debug)]
pub struct Welded {
    pub points: Vec<Point3>,
    pub a_map: Vec<usize>,
    pub b_map: Vec<usize>,
    pub chords: Vec<Chord>,
    /// Points lying on each input edge, keyed by surface and sorted unified ids.
    pub edge_points: HashMap<(Source, usize, usize), Vec<usize>>,
    pub tol: f64,
}

impl Welded {
    pub fn map(&self, s: Source) -> &[usize] {
        match s {
            Source::A => &self.a_map,
            Source::B => &self.b_map,
        }
    }

    /// Unified corner ids of triangle `t` of `mesh`.
    pub fn corners(&self, mesh: &TriMesh, t: usize) -> [usize; 3] {
        let m = self.map(mesh.source());
        mesh.triangles[t].v.map(|i| m[i])
    }
}

fn edge_key(s: Source, u: usize, v: usize) -> (Source, usize, usize) {
    (s, u.min(v), u.max(v))
}

/// Parameter of `w` along `u -> v` when it lies strictly inside the edge and
/// within `tol` of it.
fn on_edge(points: &[Point3], u: usize, v: usize, w: usize, tol: f64) -> Option<f64> {
    let (pu, pv, pw) = (points[u], points[v], points[w]);
    let d = pv - pu;
    let l2 = d.norm2();
    if l2 == 0.0 {
        return None;
    }
    let t = (pw - pu).dot(d) / l2;
    if t <= 0.0 || t >= 1.0 {
        return None;
    }
    ((pu + d * t - pw).norm() < tol).then_some(t)
}

/// Welds the input vertices of both surfaces together with the segment
/// endpoints and records which welded points lie on which input edges.
pub fn weld_intersection(a: &TriMesh, b: &TriMesh, report: &IntersectReport, tol: f64) -> Welded {
    let mut raw = Vec::with_capacity(a.vertices.len() + b.vertices.len() + 2 * report.segments.len());
    raw.extend_from_slice(&a.vertices);
    raw.extend_from_slice(&b.vertices);
    for s in &report.segments {
        raw.push(s.p);
        raw.push(s.q);
    }
    let (points, map) = merge_points(&raw, tol);
    let na = a.vertices.len();
    let nb = b.vertices.len();
    let a_map = map[..na].to_vec();
    let b_map = map[na..na + nb].to_vec();
    let mut w = Welded { points, a_map, b_map, chords: Vec::new(), edge_points: HashMap::new(), tol };
    let mut seen = HashSet::new();
    for (k, s) in report.segments.iter().enumerate() {
        let p = map[na + nb + 2 * k];
        let q = map[na + nb + 2 * k + 1];
        for (src, mesh, tri) in [(Source::A, a, s.tri_a), (Source::B, b, s.tri_b)] {
            let c = w.corners(mesh, tri);
            for (id, key) in [(p, s.key_p), (q, s.key_q)] {
                if c.contains(&id) {
                    continue;
                }
                let keyed = match key {
                    PointKey::Edge { surface, lo, hi, .. } if surface == src => {
                        let m = w.map(src);
                        Some(edge_key(src, m[lo], m[hi]))
                    }
                    _ => None,
                };
                let e = keyed.or_else(|| {
                    (0..3)
                        .find(|&j| on_edge(&w.points, c[j], c[(j + 1) % 3], id, tol).is_some())
                        .map(|j| edge_key(src, c[j], c[(j + 1) % 3]))
                });
                if let Some(e) = e {
                    if seen.insert((e, id)) {
                        w.edge_points.entry(e).or_default().push(id);
                    }
                }
            }
        }
        if p != q {
            w.chords.push(Chord { p, q, tri_a: s.tri_a, tri_b: s.tri_b });
        } else {
            debug!("segment of pair ({}, {}) collapsed by welding", s.tri_a, s.tri_b);
        }
    }
    for v in w.edge_points.values_mut() {
        v.sort_unstable();
    }
    w
}

/// Interior points of edge `u -> v`, ordered from `u` to `v`.
pub fn points_along(w: &Welded, s: Source, u: usize, v: usize) -> Vec<usize> {
    let Some(ids) = w.edge_points.get(&edge_key(s, u, v)) else { return Vec::new() };
    let (pu, d) = (w.points[u], w.points[v] - w.points[u]);
    let mut with_t: Vec<(f64, usize)> =
        ids.iter().filter(|&&i| i != u && i != v).map(|&i| ((w.points[i] - pu).dot(d), i)).collect();
    with_t.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    with_t.dedup_by_key(|x| x.1);
    with_t.into_iter().map(|x| x.1).collect()
}

/// A retriangulated surface over the welded vertex pool. `parent[i]` is the
/// input triangle that triangle `i` was cut from.
#[derive(Clone, Debug)]
pub struct SplitSurface {
    pub source: Source,
    pub triangles: Vec<Triangle>,
    pub parent: Vec<usize>,
}

impl SplitSurface {
    fn renumber(&mut self) {
        for (i, t) in self.triangles.iter_mut().enumerate() {
            t.id = i;
        }
    }
}

/// Removes triangles with repeated indices, resolves duplicated directed
/// edges by dropping near-zero-area triangles, and flips children whose
/// normal opposes their parent's.
pub fn clear_topology(split: &mut SplitSurface, points: &[Point3], parent_normals: &[Point3], tol: f64) -> Result<()> {
    let area = |t: &Triangle| tri_normal(points[t.v[0]], points[t.v[1]], points[t.v[2]]).norm() * 0.5;
    let thin = |t: &Triangle| {
        let longest = t.edges().iter().map(|&(u, v)| (points[u] - points[v]).norm()).fold(0.0, f64::max);
        area(t) <= tol * longest
    };
    let mut keep: Vec<bool> = split.triangles.iter().map(|t| !t.is_degenerate()).collect();
    for i in 0..split.triangles.len() {
        let t = split.triangles[i];
        // Slivers have no reliable normal; their winding comes from the retriangulation.
        if !keep[i] || thin(&t) {
            continue;
        }
        let n = tri_normal(points[t.v[0]], points[t.v[1]], points[t.v[2]]);
        if n.dot(parent_normals[split.parent[i]]) < 0.0 {
            split.triangles[i] = t.reversed();
        }
    }
    for pass in 0..10 {
        let mut owners: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, t) in split.triangles.iter().enumerate() {
            if keep[i] {
                for e in t.edges() {
                    owners.entry(e).or_default().push(i);
                }
            }
        }
        let dups: Vec<Vec<usize>> = owners.into_values().filter(|o| o.len() > 1).collect();
        if dups.is_empty() {
            let removed = keep.iter().filter(|k| !**k).count();
            if removed > 0 {
                debug!("{:?}: removed {removed} triangles during cleanup", split.source);
            }
            let (tris, parents): (Vec<_>, Vec<_>) = split
                .triangles
                .iter()
                .zip(&split.parent)
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|((t, p), _)| (*t, *p))
                .unzip();
            split.triangles = tris;
            split.parent = parents;
            split.renumber();
            return Ok(());
        }
        let mut changed = false;
        for group in dups {
            for i in group.into_iter().filter(|&i| thin(&split.triangles[i])) {
                if keep[i] {
                    keep[i] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            warn!("pass {pass}: duplicated directed edges without a degenerate culprit");
            break;
        }
    }
    Err(Error::Topology(format!("{:?}: duplicated directed edges remain after cleanup", split.source)))
}

/// Indices of the extreme vertices along -x, +x, -y, +y, -z, +z among `ids`;
/// ties go to the lowest index.
pub fn compute_extrema(points: &[Point3], ids: impl IntoIterator<Item = usize>) -> [usize; 6] {
    let mut best = [usize::MAX; 6];
    let mut ids: Vec<usize> = ids.into_iter().collect();
    ids.sort_unstable();
    ids.dedup();
    for i in ids {
        let p = points[i];
        for axis in 0..3 {
            let (lo, hi) = (2 * axis, 2 * axis + 1);
            if best[lo] == usize::MAX || p[axis] < points[best[lo]][axis] {
                best[lo] = i;
            }
            if best[hi] == usize::MAX || p[axis] > points[best[hi]][axis] {
                best[hi] = i;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Quadratic oracle: number of clusters under greedy first-occurrence welding.
    fn brute_unique(raw: &[Point3], tol: f64) -> usize {
        let mut reps: Vec<Point3> = Vec::new();
        for &p in raw {
            if !reps.iter().any(|r| (*r - p).norm() <= tol) {
                reps.push(p);
            }
        }
        reps.len()
    }

    #[test]
    fn welds_near_duplicates() {
        let raw = [
            Point3::new(0., 0., 0.),
            Point3::new(1e-12, 0., 0.),
            Point3::new(1., 0., 0.),
            Point3::new(1., 1e-12, -1e-12),
        ];
        let (u, m) = merge_points(&raw, 1e-9);
        assert_eq!(u.len(), 2);
        assert_eq!(m, vec![0, 0, 1, 1]);
        assert_eq!(u[0], raw[0]);
    }

    #[test]
    fn extrema_ties_take_lowest_index() {
        let pts = vec![
            Point3::new(0., 0., 0.),
            Point3::new(1., 0., 0.),
            Point3::new(0., 1., 0.),
            Point3::new(0., 0., 1.),
            Point3::new(1., 1., 1.),
        ];
        assert_eq!(compute_extrema(&pts, 0..5), [0, 1, 0, 2, 0, 3]);
    }

    #[test]
    fn cleanup_drops_repeated_indices_and_flips() {
        let pts = vec![Point3::new(0., 0., 0.), Point3::new(1., 0., 0.), Point3::new(0., 1., 0.)];
        let mut s = SplitSurface {
            source: Source::A,
            triangles: vec![Triangle::new([0, 2, 1], Source::A, 0), Triangle::new([0, 0, 1], Source::A, 1)],
            parent: vec![0, 0],
        };
        clear_topology(&mut s, &pts, &[Point3::new(0., 0., 1.)], 1e-9).unwrap();
        assert_eq!(s.triangles.len(), 1);
        assert_eq!(s.triangles[0].v, [0, 1, 2]);
    }

    #[test]
    fn cleanup_removes_sliver_sharing_directed_edge() {
        let pts = vec![
            Point3::new(0., 0., 0.),
            Point3::new(1., 0., 0.),
            Point3::new(0., 1., 0.),
            Point3::new(0.5, 0., 0.),
        ];
        let mut s = SplitSurface {
            source: Source::B,
            triangles: vec![Triangle::new([0, 1, 2], Source::B, 0), Triangle::new([0, 1, 3], Source::B, 1)],
            parent: vec![0, 0],
        };
        clear_topology(&mut s, &pts, &[Point3::new(0., 0., 1.)], 1e-9).unwrap();
        assert_eq!(s.triangles.len(), 1);
    }

    proptest! {
        #[test]
        fn grid_weld_matches_quadratic_oracle(
            base in proptest::collection::vec((0i32..6, 0i32..6, 0i32..6), 1..60),
            jitter in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 60),
        ) {
            // Clusters are one unit apart with jitter far below tolerance.
            let raw: Vec<Point3> = base
                .iter()
                .zip(&jitter)
                .map(|(&(x, y, z), &(a, b, c))| Point3::new(x as f64 + a * 1e-4, y as f64 + b * 1e-4, z as f64 + c * 1e-4))
                .collect();
            let (u, m) = merge_points(&raw, 1e-2);
            prop_assert_eq!(u.len(), brute_unique(&raw, 1e-2));
            for (i, p) in raw.iter().enumerate() {
                prop_assert!((u[m[i]] - *p).norm() <= 1e-2);
            }
        }
    }
}
