//! Chains welded intersection edges into oriented loops.

use std::collections::{BTreeMap, HashMap, HashSet};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{tri_normal, Point3, Source, TriMesh, Triangle};
use crate::merge::Chord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    Open,
    HardClosed,
    SoftClosed,
}

/// An oriented intersection edge with every triangle pair that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedEdge {
    pub head: usize,
    pub tail: usize,
    /// `(tri_a, tri_b)` pairs in input-triangle ids.
    pub owners: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedLoop {
    pub id: usize,
    /// Vertex path; closed cycles repeat the first vertex at the end.
    pub verts: Vec<usize>,
    pub kind: LoopKind,
    /// Indices into the edge list the loop was built from (empty for
    /// boundary-completed loops).
    pub edges: Vec<usize>,
    /// Set when the loop was closed along the boundary of this surface.
    pub completed_on: Option<Source>,
}

impl OrientedLoop {
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.verts.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn is_cycle(&self) -> bool {
        self.verts.len() > 2 && self.verts.first() == self.verts.last()
    }
}

/// Deduplicates chords regardless of direction and orients each so that it
/// runs along `n_A x n_B` of its owning triangles.
pub fn orient_edges(chords: &[Chord], a: &TriMesh, b: &TriMesh, points: &[Point3]) -> Vec<DirectedEdge> {
    let normal = |m: &TriMesh, t: usize| {
        let c = m.corners(&m.triangles[t]);
        tri_normal(c[0], c[1], c[2])
    };
    let mut groups: BTreeMap<(usize, usize), Vec<&Chord>> = BTreeMap::new();
    for c in chords {
        groups.entry((c.p.min(c.q), c.p.max(c.q))).or_default().push(c);
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((lo, hi), group) in groups {
        let dir = points[hi] - points[lo];
        let mut vote = 0.0f64;
        let mut signs = (0, 0);
        for c in &group {
            let d = normal(a, c.tri_a).normalized().cross(normal(b, c.tri_b).normalized());
            let s = d.dot(dir);
            vote += s;
            if s > 0.0 {
                signs.0 += 1;
            } else {
                signs.1 += 1;
            }
        }
        if signs.0 > 0 && signs.1 > 0 {
            warn!("edge ({lo}, {hi}): owners disagree on orientation");
        }
        let (head, tail) = if vote >= 0.0 { (lo, hi) } else { (hi, lo) };
        out.push(DirectedEdge { head, tail, owners: group.iter().map(|c| (c.tri_a, c.tri_b)).collect() });
    }
    out
}

/// Number of loop edges incident to each vertex.
pub fn vertex_degrees(edges: &[DirectedEdge]) -> HashMap<usize, usize> {
    let mut deg = HashMap::new();
    for e in edges {
        *deg.entry(e.head).or_insert(0) += 1;
        *deg.entry(e.tail).or_insert(0) += 1;
    }
    deg
}

pub fn classify_loop(verts: &[usize], degree: &HashMap<usize, usize>) -> Result<LoopKind> {
    let deg = |v: &usize| degree.get(v).copied().unwrap_or(0);
    if verts.len() < 2 {
        return Err(Error::Topology("loop with fewer than two vertices".into()));
    }
    let (first, last) = (verts[0], verts[verts.len() - 1]);
    if verts[1..verts.len() - 1].iter().any(|v| deg(v) != 2) {
        return Err(Error::Topology("loop passes through a vertex of degree other than two".into()));
    }
    if first == last && deg(&first) == 2 {
        return Ok(LoopKind::HardClosed);
    }
    if deg(&first) > 2 && deg(&last) > 2 {
        return Ok(LoopKind::SoftClosed);
    }
    if deg(&first) == 1 || deg(&last) == 1 {
        return Ok(LoopKind::Open);
    }
    Err(Error::Topology(format!("loop ends at vertices of degree {} and {}", deg(&first), deg(&last))))
}

/// Chains edges head to tail into loops. Chains stop at vertices of degree
/// other than two, so junctions split the edge graph into arcs.
pub fn build_loops(edges: &[DirectedEdge]) -> Result<Vec<OrientedLoop>> {
    let degree = vertex_degrees(edges);
    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        incident.entry(e.head).or_default().push(i);
        incident.entry(e.tail).or_default().push(i);
    }
    let mut used = vec![false; edges.len()];
    let mut paths: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let other = |e: usize, v: usize| if edges[e].head == v { edges[e].tail } else { edges[e].head };
    let walk = |start: usize, first: usize, used: &mut Vec<bool>| {
        let mut verts = vec![start];
        let mut ids = Vec::new();
        let mut e = first;
        loop {
            used[e] = true;
            ids.push(e);
            let v = other(e, *verts.last().unwrap());
            verts.push(v);
            if degree[&v] != 2 || v == start {
                break;
            }
            match incident[&v].iter().copied().find(|&x| !used[x]) {
                Some(n) => e = n,
                None => break,
            }
        }
        (verts, ids)
    };
    let starts: Vec<usize> = incident.keys().copied().filter(|v| degree[v] != 2).collect();
    for s in starts {
        for k in 0..incident[&s].len() {
            let e = incident[&s][k];
            if !used[e] {
                paths.push(walk(s, e, &mut used));
            }
        }
    }
    let cycle_starts: Vec<usize> = incident.keys().copied().collect();
    for s in cycle_starts {
        while let Some(e) = incident[&s].iter().copied().find(|&x| !used[x]) {
            paths.push(walk(s, e, &mut used));
        }
    }
    let mut loops = Vec::with_capacity(paths.len());
    for (mut verts, mut ids) in paths {
        let forward = ids
            .iter()
            .zip(verts.windows(2))
            .filter(|(&e, w)| edges[e].head == w[0] && edges[e].tail == w[1])
            .count();
        if 2 * forward < ids.len() {
            verts.reverse();
            ids.reverse();
        }
        if forward != 0 && forward != ids.len() {
            warn!("loop through vertex {} mixes edge directions", verts[0]);
        }
        let kind = classify_loop(&verts, &degree)?;
        if kind == LoopKind::HardClosed {
            let n = verts.len() - 1;
            let k = (0..n).min_by_key(|&i| verts[i]).unwrap();
            let mut rot: Vec<usize> = (0..n).map(|i| verts[(k + i) % n]).collect();
            rot.push(rot[0]);
            verts = rot;
            ids.rotate_left(k);
        }
        loops.push(OrientedLoop { id: loops.len(), verts, kind, edges: ids, completed_on: None });
    }
    Ok(loops)
}

/// Directed edge to the triangle that contains it.
pub fn directed_edge_map(tris: &[Triangle]) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::with_capacity(tris.len() * 3);
    for (i, t) in tris.iter().enumerate() {
        for e in t.edges() {
            m.insert(e, i);
        }
    }
    m
}

/// Outcome of boundary completion on one surface.
#[derive(Clone, Debug, Default)]
pub struct Completion {
    pub loops: Vec<OrientedLoop>,
    /// Open loops excluded because an endpoint is not on the boundary.
    pub dangling: Vec<usize>,
}

/// Closes the open loops of one surface with pieces of its boundary. Every
/// region cut off by open loops yields one closed loop, oriented so the
/// region lies on its positive side. New loops are numbered from `next_id`.
pub fn close_open_loops_on_boundary(loops: &[OrientedLoop], surface: &[Triangle], source: Source, next_id: usize) -> Completion {
    let emap = directed_edge_map(surface);
    let on_boundary: HashSet<usize> = emap
        .keys()
        .filter(|&&(u, v)| !emap.contains_key(&(v, u)))
        .flat_map(|&(u, v)| [u, v])
        .collect();
    let mut out = Completion::default();
    let mut barrier: HashSet<(usize, usize)> = HashSet::new();
    let mut starts = Vec::new();
    for l in loops.iter().filter(|l| l.kind == LoopKind::Open) {
        let (first, last) = (l.verts[0], *l.verts.last().unwrap());
        if !on_boundary.contains(&first) || !on_boundary.contains(&last) {
            warn!("{}", Error::DanglingLoop { loop_id: l.id });
            out.dangling.push(l.id);
            continue;
        }
        for (h, t) in l.directed_edges() {
            barrier.insert((h.min(t), h.max(t)));
            starts.push((h, t));
            starts.push((t, h));
        }
    }
    let is_stop = |u: usize, v: usize| barrier.contains(&(u.min(v), u.max(v))) || !emap.contains_key(&(v, u));
    let mut visited: HashSet<(usize, usize)> = HashSet::new();
    for (h, t) in starts {
        if visited.contains(&(h, t)) || !emap.contains_key(&(h, t)) {
            continue;
        }
        let mut cycle = vec![h];
        let (mut u, mut v) = (h, t);
        let mut touches_boundary = false;
        let limit = 4 * surface.len() + 8;
        while visited.insert((u, v)) && cycle.len() <= limit {
            cycle.push(v);
            // Rotate around v inside the region until a stopping edge is found.
            let mut tri = emap[&(u, v)];
            let mut w;
            let mut guard = 0;
            loop {
                let t = surface[tri].v;
                let k = (0..3).find(|&k| t[k] == v).unwrap();
                w = t[(k + 1) % 3];
                if is_stop(v, w) || guard > surface.len() {
                    break;
                }
                tri = emap[&(w, v)];
                guard += 1;
            }
            if !emap.contains_key(&(w, v)) {
                touches_boundary = true;
            }
            u = v;
            v = w;
        }
        if cycle.first() != cycle.last() {
            warn!("boundary completion did not close at vertex {h}");
            continue;
        }
        if !touches_boundary {
            continue;
        }
        cycle.reverse();
        out.loops.push(OrientedLoop {
            id: next_id + out.loops.len(),
            verts: cycle,
            kind: LoopKind::HardClosed,
            edges: Vec::new(),
            completed_on: Some(source),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Source;

    fn de(h: usize, t: usize) -> DirectedEdge {
        DirectedEdge { head: h, tail: t, owners: vec![(0, 0)] }
    }

    #[test]
    fn single_edge_is_open() {
        let l = build_loops(&[de(3, 7)]).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].verts, vec![3, 7]);
        assert_eq!(l[0].kind, LoopKind::Open);
    }

    #[test]
    fn triangle_cycle_is_hard_closed_from_lowest_vertex() {
        let l = build_loops(&[de(5, 2), de(2, 9), de(9, 5)]).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].kind, LoopKind::HardClosed);
        assert_eq!(l[0].verts, vec![2, 9, 5, 2]);
        assert_eq!(l[0].edges.len(), 3);
    }

    #[test]
    fn square_cycle_is_hard_closed() {
        let l = build_loops(&[de(0, 1), de(1, 2), de(2, 3), de(3, 0)]).unwrap();
        assert_eq!(l[0].kind, LoopKind::HardClosed);
    }

    #[test]
    fn reversed_edges_follow_majority() {
        let l = build_loops(&[de(1, 0), de(2, 1), de(3, 2)]).unwrap();
        assert_eq!(l[0].verts, vec![3, 2, 1, 0]);
    }

    #[test]
    fn junction_splits_into_soft_closed_arcs() {
        // Two vertices joined by four paths: each arc runs junction to junction.
        let e = [de(0, 2), de(2, 1), de(0, 3), de(3, 1), de(1, 4), de(4, 0), de(1, 5), de(5, 0)];
        let l = build_loops(&e).unwrap();
        assert_eq!(l.len(), 4);
        assert!(l.iter().all(|x| x.kind == LoopKind::SoftClosed));
        let deg = vertex_degrees(&e);
        assert_eq!(deg[&0], 4);
        let total: usize = l.iter().map(|x| x.edges.len()).sum();
        assert_eq!(total, e.len());
        for x in &l {
            assert_eq!(classify_loop(&x.verts, &deg).unwrap(), x.kind);
            for (k, w) in x.verts.windows(2).enumerate() {
                assert_eq!((e[x.edges[k]].head, e[x.edges[k]].tail), (w[0], w[1]));
            }
        }
    }

    #[test]
    fn chord_across_disk_gives_two_closed_loops() {
        // A 3x3-vertex grid square; the open loop runs along the middle column.
        let mut tris = Vec::new();
        for j in 0..2 {
            for i in 0..2 {
                let v = |di: usize, dj: usize| (j + dj) * 3 + i + di;
                tris.push(Triangle::new([v(0, 0), v(1, 0), v(1, 1)], Source::A, tris.len()));
                tris.push(Triangle::new([v(0, 0), v(1, 1), v(0, 1)], Source::A, tris.len()));
            }
        }
        let open = OrientedLoop { id: 0, verts: vec![1, 4, 7], kind: LoopKind::Open, edges: vec![0, 1], completed_on: None };
        let c = close_open_loops_on_boundary(&[open], &tris, Source::A, 1);
        assert!(c.dangling.is_empty());
        assert_eq!(c.loops.len(), 2);
        let mut lens: Vec<usize> = c.loops.iter().map(|l| l.verts.len()).collect();
        lens.sort();
        assert_eq!(lens, vec![7, 7]);
        assert!(c.loops.iter().all(|l| l.is_cycle()));
    }

    #[test]
    fn interior_open_loop_dangles() {
        let tris: Vec<Triangle> = crate::shapes::plane_grid(1.0, 4, 0.0).triangles;
        let open = OrientedLoop { id: 3, verts: vec![6, 12], kind: LoopKind::Open, edges: vec![0], completed_on: None };
        let c = close_open_loops_on_boundary(&[open], &tris, Source::B, 4);
        assert_eq!(c.dangling, vec![3]);
        assert!(c.loops.is_empty());
    }
}
