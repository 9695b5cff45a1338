//! Splits every triangle touched by the intersection so that all
//! intersection chords become mesh edges.

use std::collections::{BTreeSet, HashMap};

use log::{debug, warn};

use crate::earclip::{bridge_holes, ear_clip, point_in_polygon, signed_area, P2};
use crate::geometry::{tri_normal, Point3, Source, TriMesh, Triangle};
use crate::merge::{points_along, SplitSurface, Welded};

/// Planar straight-line graph inside one input triangle, in unified ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrianglePslg {
    pub corners: [usize; 3],
    /// Interior points of side `k` (corner `k` to corner `k + 1`), in order.
    pub sides: [Vec<usize>; 3],
    pub chords: Vec<(usize, usize)>,
}

impl TrianglePslg {
    pub fn is_trivial(&self) -> bool {
        self.chords.is_empty() && self.sides.iter().all(|s| s.is_empty())
    }
}

struct Frame {
    origin: Point3,
    u: Point3,
    v: Point3,
}

impl Frame {
    fn new(c: [Point3; 3]) -> Frame {
        let n = tri_normal(c[0], c[1], c[2]).normalized();
        let edges = [c[1] - c[0], c[2] - c[1], c[0] - c[2]];
        let longest = edges.iter().copied().max_by(|a, b| a.norm2().total_cmp(&b.norm2())).unwrap();
        let u = longest.normalized();
        Frame { origin: c[0], u, v: n.cross(u) }
    }

    fn project(&self, p: Point3) -> P2 {
        let d = p - self.origin;
        [d.dot(self.u), d.dot(self.v)]
    }
}

/// Triangulates the PSLG of one triangle. Output triangles are in unified
/// ids and wound like the input triangle.
pub fn retriangulate(pslg: &TrianglePslg, points: &[Point3]) -> Vec<[usize; 3]> {
    if pslg.is_trivial() {
        return vec![pslg.corners];
    }
    let pieces = decompose(pslg, points);
    let mut out = Vec::new();
    for (f, hs) in &pieces.faces {
        let poly = if hs.is_empty() { f.clone() } else { bridge_holes(f, hs, &pieces.pts) };
        for t in ear_clip(&poly, &pieces.pts) {
            out.push(t.map(|l| pieces.ids[l]));
        }
    }
    out
}

/// Bounded faces of a triangle's PSLG, each an outer ring plus hole rings,
/// in ids local to `ids`/`pts`.
struct Pieces {
    ids: Vec<usize>,
    pts: Vec<P2>,
    faces: Vec<(Vec<usize>, Vec<Vec<usize>>)>,
}

/// Outer rings (in unified ids, counter-clockwise in the triangle's winding)
/// of the polygons the chords cut a triangle into.
pub fn pslg_polygons(pslg: &TrianglePslg, points: &[Point3]) -> Vec<Vec<usize>> {
    if pslg.is_trivial() {
        return vec![pslg.corners.to_vec()];
    }
    let p = decompose(pslg, points);
    p.faces.iter().map(|(f, _)| f.iter().map(|&l| p.ids[l]).collect()).collect()
}

fn decompose(pslg: &TrianglePslg, points: &[Point3]) -> Pieces {
    let c = pslg.corners;
    let frame = Frame::new(c.map(|i| points[i]));
    let mut ids: Vec<usize> = Vec::new();
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut add = |id: usize, ids: &mut Vec<usize>| *local.entry(id).or_insert_with(|| {
        ids.push(id);
        ids.len() - 1
    });
    let mut ring = Vec::new();
    let mut side_of: HashMap<usize, Vec<usize>> = HashMap::new();
    for k in 0..3 {
        for (id, sides) in std::iter::once((c[k], vec![k, (k + 2) % 3]))
            .chain(pslg.sides[k].iter().map(|&s| (s, vec![k])))
        {
            let l = add(id, &mut ids);
            if !ring.contains(&l) {
                ring.push(l);
            }
            side_of.entry(l).or_default().extend(sides);
        }
    }
    let mut chords = Vec::new();
    for &(p, q) in &pslg.chords {
        if p == q {
            continue;
        }
        chords.push((add(p, &mut ids), add(q, &mut ids)));
    }
    let pts: Vec<P2> = ids.iter().map(|&i| frame.project(points[i])).collect();

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        edges.insert((a.min(b), a.max(b)));
    }
    for (p, q) in chords {
        let none = Vec::new();
        let (sp, sq) = (side_of.get(&p).unwrap_or(&none), side_of.get(&q).unwrap_or(&none));
        let shared_side = sp.iter().any(|s| sq.contains(s));
        if shared_side {
            continue;
        }
        edges.insert((p.min(q), p.max(q)));
    }

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    // Drop dangling chords so every remaining edge bounds two faces.
    loop {
        let leaf = (0..adj.len()).find(|&i| adj[i].len() == 1);
        let Some(i) = leaf else { break };
        let j = adj[i][0];
        debug!("pruning dangling chord end {}", ids[i]);
        adj[i].clear();
        adj[j].retain(|&x| x != i);
    }
    for (i, list) in adj.iter_mut().enumerate() {
        let o = pts[i];
        list.sort_by(|&a, &b| {
            let ta = (pts[a][1] - o[1]).atan2(pts[a][0] - o[0]);
            let tb = (pts[b][1] - o[1]).atan2(pts[b][0] - o[0]);
            ta.total_cmp(&tb)
        });
    }

    let faces = trace_faces(&adj);
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for f in faces {
        let a = signed_area(&pts, &f);
        if a > 0.0 {
            positive.push((a, f));
        } else if a < 0.0 {
            negative.push((a, f));
        }
    }
    negative.sort_by(|x, y| x.0.total_cmp(&y.0));
    let holes: Vec<Vec<usize>> = negative.into_iter().skip(1).map(|x| x.1).collect();
    let mut face_holes: Vec<Vec<Vec<usize>>> = vec![Vec::new(); positive.len()];
    for h in holes {
        let probe = pts[h[0]];
        let host = positive
            .iter()
            .enumerate()
            .filter(|(_, (_, f))| !f.iter().any(|v| h.contains(v)) && point_in_polygon(probe, &pts, f))
            .min_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(i, _)| i);
        match host {
            Some(i) => face_holes[i].push(h),
            None => warn!("hole cycle without a containing face"),
        }
    }

    let faces = positive.into_iter().map(|(_, f)| f).zip(face_holes).collect();
    Pieces { ids, pts, faces }
}

/// Traces the faces of a planar graph whose adjacency lists are sorted
/// counter-clockwise. Bounded faces come out counter-clockwise.
fn trace_faces(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut used: HashMap<(usize, usize), bool> = HashMap::new();
    let mut faces = Vec::new();
    for a in 0..adj.len() {
        for &b in &adj[a] {
            if used.contains_key(&(a, b)) {
                continue;
            }
            let mut face = Vec::new();
            let (mut u, mut v) = (a, b);
            while !used.contains_key(&(u, v)) {
                used.insert((u, v), true);
                face.push(u);
                let list = &adj[v];
                let k = list.iter().position(|&x| x == u).unwrap();
                let w = list[(k + list.len() - 1) % list.len()];
                u = v;
                v = w;
            }
            faces.push(face);
        }
    }
    faces
}

/// Builds the PSLG of every touched triangle of `mesh`.
pub fn build_pslgs(mesh: &TriMesh, w: &Welded) -> HashMap<usize, TrianglePslg> {
    let src = mesh.source();
    let mut touched: BTreeSet<usize> = BTreeSet::new();
    let mut chords: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for ch in &w.chords {
        let t = match src {
            Source::A => ch.tri_a,
            Source::B => ch.tri_b,
        };
        touched.insert(t);
        chords.entry(t).or_default().push((ch.p, ch.q));
    }
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for t in 0..mesh.triangles.len() {
        let c = w.corners(mesh, t);
        for k in 0..3 {
            let (u, v) = (c[k], c[(k + 1) % 3]);
            by_edge.entry((u.min(v), u.max(v))).or_default().push(t);
        }
    }
    for &(_, u, v) in w.edge_points.keys().filter(|k| k.0 == src) {
        if let Some(ts) = by_edge.get(&(u, v)) {
            touched.extend(ts.iter().copied());
        }
    }
    touched
        .into_iter()
        .map(|t| {
            let c = w.corners(mesh, t);
            let sides = [0, 1, 2].map(|k| points_along(w, src, c[k], c[(k + 1) % 3]));
            let ch = chords.remove(&t).unwrap_or_default();
            (t, TrianglePslg { corners: c, sides, chords: ch })
        })
        .collect()
}

/// Retriangulates a whole surface over the welded pool.
pub fn split_surface(mesh: &TriMesh, w: &Welded) -> SplitSurface {
    let src = mesh.source();
    let pslgs = build_pslgs(mesh, w);
    let mut tris = Vec::with_capacity(mesh.triangles.len() + 4 * pslgs.len());
    let mut parent = Vec::with_capacity(tris.capacity());
    for t in 0..mesh.triangles.len() {
        let pieces = match pslgs.get(&t) {
            Some(p) => retriangulate(p, &w.points),
            None => vec![w.corners(mesh, t)],
        };
        for v in pieces {
            tris.push(Triangle::new(v, src, tris.len()));
            parent.push(t);
        }
    }
    SplitSurface { source: src, triangles: tris, parent }
}
