//! Grows sub-surfaces from loops by advancing-front traversal and marks
//! them private or public.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{edge_connected_components, Point3, Source, TriMesh, Triangle};
use crate::loops::{directed_edge_map, LoopKind, OrientedLoop};
use crate::merge::SplitSurface;

/// Side of a loop. `Plus` regions contain the loop's edges reversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Owner {
    pub loop_id: usize,
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubSurface {
    pub id: usize,
    pub source: Source,
    /// Sorted indices into the split surface's triangles.
    pub triangles: Vec<usize>,
    pub owners: Vec<Owner>,
    pub is_public: bool,
    pub has_boundary_loop: bool,
}

impl SubSurface {
    pub fn owns(&self, loop_id: usize, sign: Sign) -> bool {
        self.owners.iter().any(|o| o.loop_id == loop_id && o.sign == sign)
    }

    /// Sub-surface as a standalone mesh over the shared vertex pool.
    pub fn to_mesh(&self, split: &SplitSurface, points: &[Point3]) -> TriMesh {
        let tris: Vec<Triangle> = self
            .triangles
            .iter()
            .enumerate()
            .map(|(i, &t)| Triangle::new(split.triangles[t].v, self.source, i))
            .collect();
        let mut m = TriMesh { vertices: points.to_vec(), triangles: tris, closed: false, boundary_loops: Vec::new() };
        m.refresh_topology();
        m.compacted()
    }
}

/// A region grown from one seed, before owner bookkeeping.
#[derive(Clone, Debug)]
pub struct Grown {
    pub triangles: BTreeSet<usize>,
    /// Directed edges left on the front, as they occur in region triangles.
    pub front: Vec<(usize, usize)>,
}

fn undirected(e: (usize, usize)) -> (usize, usize) {
    (e.0.min(e.1), e.0.max(e.1))
}

/// Advancing-front growth from `seed` on one side. The front never crosses
/// an edge in `barrier` once growth has left the seed.
pub fn grow_subsurface(
    seed: &OrientedLoop,
    sign: Sign,
    tris: &[Triangle],
    emap: &HashMap<(usize, usize), usize>,
    barrier: &HashSet<(usize, usize)>,
) -> Result<Grown> {
    let mut region = BTreeSet::new();
    let mut front: HashSet<(usize, usize)> = HashSet::new();
    let mut queue = VecDeque::new();
    let push = |e: (usize, usize), front: &mut HashSet<(usize, usize)>, queue: &mut VecDeque<(usize, usize)>| {
        if !front.remove(&(e.1, e.0)) && front.insert(e) {
            queue.push_back(e);
        }
    };
    let adopt = |t: usize,
                 region: &mut BTreeSet<usize>,
                 front: &mut HashSet<(usize, usize)>,
                 queue: &mut VecDeque<(usize, usize)>| {
        if region.insert(t) {
            for e in tris[t].edges() {
                push(e, front, queue);
            }
        }
    };
    let seeds: Vec<(usize, usize)> = seed
        .directed_edges()
        .map(|(h, t)| if sign == Sign::Plus { (h, t) } else { (t, h) })
        .collect();
    for &(h, t) in &seeds {
        if let Some(&tri) = emap.get(&(t, h)) {
            adopt(tri, &mut region, &mut front, &mut queue);
        }
    }
    while let Some(e) = queue.pop_front() {
        if !front.contains(&e) || barrier.contains(&undirected(e)) {
            continue;
        }
        match emap.get(&(e.1, e.0)) {
            Some(&t) if !region.contains(&t) => adopt(t, &mut region, &mut front, &mut queue),
            Some(_) => return Err(Error::Topology(format!("front edge {e:?} faces its own region"))),
            None => {}
        }
    }
    let mut front: Vec<_> = front.into_iter().collect();
    front.sort_unstable();
    Ok(Grown { triangles: region, front })
}

/// Triangle set of a grown region with its final front.
type Region = (Vec<usize>, Vec<(usize, usize)>);

/// Builds all sub-surfaces of one split surface. `loops` are the
/// intersection loops; `completed` are boundary-completed loops of this
/// surface, which seed only their positive side.
pub fn build_subsurfaces(
    split: &SplitSurface,
    loops: &[OrientedLoop],
    completed: &[OrientedLoop],
    excluded: &[usize],
) -> Result<Vec<SubSurface>> {
    let emap = directed_edge_map(&split.triangles);
    let mut barrier = HashSet::new();
    let mut loop_of: HashMap<(usize, usize), Owner> = HashMap::new();
    for l in loops.iter().filter(|l| !excluded.contains(&l.id)) {
        for (h, t) in l.directed_edges() {
            barrier.insert(undirected((h, t)));
            loop_of.insert((t, h), Owner { loop_id: l.id, sign: Sign::Plus });
            loop_of.insert((h, t), Owner { loop_id: l.id, sign: Sign::Minus });
        }
    }
    let mut seeds: Vec<(&OrientedLoop, Sign)> = Vec::new();
    for l in loops.iter().filter(|l| l.kind != LoopKind::Open && !excluded.contains(&l.id)) {
        seeds.push((l, Sign::Plus));
        seeds.push((l, Sign::Minus));
    }
    for l in completed {
        seeds.push((l, Sign::Plus));
    }
    let mut regions: Vec<Region> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    for (l, sign) in seeds {
        let g = grow_subsurface(l, sign, &split.triangles, &emap, &barrier)?;
        if g.triangles.is_empty() {
            continue;
        }
        let key: Vec<usize> = g.triangles.into_iter().collect();
        if !index.contains_key(&key) {
            index.insert(key.clone(), regions.len());
            regions.push((key, g.front));
        }
    }
    let mut owner_of = vec![usize::MAX; split.triangles.len()];
    for (r, (tris, _)) in regions.iter().enumerate() {
        for &t in tris {
            if owner_of[t] != usize::MAX {
                return Err(Error::Topology(format!(
                    "{:?}: sub-surfaces {} and {r} overlap at triangle {t}",
                    split.source, owner_of[t]
                )));
            }
            owner_of[t] = r;
        }
    }
    let mut out = Vec::new();
    for (tris, front) in regions {
        let mut owners = BTreeSet::new();
        let mut has_boundary = false;
        for e in front {
            if let Some(o) = loop_of.get(&e) {
                owners.insert(*o);
            } else if !emap.contains_key(&(e.1, e.0)) {
                has_boundary = true;
            } else {
                return Err(Error::Topology(format!("{:?}: front stalled at edge {e:?}", split.source)));
            }
        }
        let owners: Vec<Owner> = owners.into_iter().collect();
        let is_public = owners.len() + usize::from(has_boundary) >= 2;
        out.push(SubSurface { id: out.len(), source: split.source, triangles: tris, owners, is_public, has_boundary_loop: has_boundary });
    }
    let rest: Vec<usize> = (0..split.triangles.len()).filter(|&t| owner_of[t] == usize::MAX).collect();
    if !rest.is_empty() {
        let sub: Vec<Triangle> = rest.iter().map(|&t| split.triangles[t]).collect();
        for comp in edge_connected_components(&sub) {
            let mut tris: Vec<usize> = comp.into_iter().map(|i| rest[i]).collect();
            tris.sort_unstable();
            let has_boundary = tris.iter().any(|&t| split.triangles[t].edges().iter().any(|&(u, v)| !emap.contains_key(&(v, u))));
            warn!("{:?}: {} triangles not reached by any loop", split.source, tris.len());
            out.push(SubSurface {
                id: out.len(),
                source: split.source,
                triangles: tris,
                owners: Vec::new(),
                is_public: false,
                has_boundary_loop: has_boundary,
            });
        }
    }
    Ok(out)
}

/// Checks that a surface has at most one public and at least one private
/// sub-surface. Returns a description of each violation.
pub fn classify_subsurfaces(surfs: &[SubSurface]) -> Vec<String> {
    let mut issues = Vec::new();
    for src in [Source::A, Source::B] {
        let mine: Vec<&SubSurface> = surfs.iter().filter(|s| s.source == src && !s.owners.is_empty()).collect();
        if mine.is_empty() {
            continue;
        }
        let public = mine.iter().filter(|s| s.is_public).count();
        if public > 1 {
            issues.push(format!("surface {} has {public} public sub-surfaces", src.tag()));
        }
        if public == mine.len() {
            issues.push(format!("surface {} has no private sub-surface", src.tag()));
        }
    }
    issues
}
