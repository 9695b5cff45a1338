//! Assembles closed sub-blocks from sub-surfaces of both inputs and labels
//! them as union, intersection or one of the subtractions.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::containment::{mesh_inside, point_inside};
use crate::error::{Error, Result};
use crate::geometry::{is_closed_manifold, signed_volume_unchecked, Point3, Source, TriMesh, Triangle};
use crate::merge::{merge_points, SplitSurface};
use crate::subsurface::{Sign, SubSurface};

/// How partner sub-surfaces are matched across a shared loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Partners own the loop with opposite signs (union or intersection).
    Opposite,
    /// Partners own the loop with the same sign (a subtraction).
    Same,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockLabel {
    Union,
    Intersection,
    AMinusB,
    BMinusA,
    Unclassified,
}

impl BlockLabel {
    pub fn name(self) -> &'static str {
        match self {
            BlockLabel::Union => "union",
            BlockLabel::Intersection => "intersection",
            BlockLabel::AMinusB => "a_minus_b",
            BlockLabel::BMinusA => "b_minus_a",
            BlockLabel::Unclassified => "unclassified",
        }
    }
}

/// Index of a sub-surface within the combined list handed to the assembler.
pub type SurfRef = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubBlock {
    /// Sorted member sub-surfaces.
    pub surfaces: Vec<SurfRef>,
    pub pairing: Pairing,
    pub label: BlockLabel,
    /// Members whose winding is reversed in the output mesh.
    pub reversed: Vec<SurfRef>,
    pub closed: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BooleanResult {
    pub union: Vec<TriMesh>,
    pub intersection: Vec<TriMesh>,
    pub a_minus_b: Vec<TriMesh>,
    pub b_minus_a: Vec<TriMesh>,
}

fn usable(s: &SubSurface) -> bool {
    !s.owners.is_empty() && !(s.is_public && s.has_boundary_loop)
}

/// Closes each usable sub-surface under partner matching, once per pairing.
/// Blocks that would need a public sub-surface touching an open boundary are
/// dropped.
pub fn assemble_blocks(surfs: &[SubSurface]) -> Result<Vec<SubBlock>> {
    let mut blocks = Vec::new();
    let mut seen: HashSet<Vec<SurfRef>> = HashSet::new();
    for pairing in [Pairing::Opposite, Pairing::Same] {
        let mut used = vec![false; surfs.len()];
        for start in 0..surfs.len() {
            if used[start] || !usable(&surfs[start]) {
                continue;
            }
            let mut members = BTreeSet::from([start]);
            let mut queue = vec![start];
            let mut viable = true;
            while let Some(s) = queue.pop() {
                for o in &surfs[s].owners {
                    let want = match pairing {
                        Pairing::Opposite => o.sign.flip(),
                        Pairing::Same => o.sign,
                    };
                    let other = surfs[s].source.other();
                    let partner = (0..surfs.len())
                        .find(|&p| surfs[p].source == other && surfs[p].owns(o.loop_id, want))
                        .ok_or(Error::Assembly { loop_id: o.loop_id })?;
                    if !usable(&surfs[partner]) {
                        viable = false;
                    }
                    if members.insert(partner) {
                        queue.push(partner);
                    }
                }
            }
            for &m in &members {
                used[m] = true;
            }
            let members: Vec<SurfRef> = members.into_iter().collect();
            if viable && seen.insert(members.clone()) {
                blocks.push(SubBlock {
                    surfaces: members,
                    pairing,
                    label: BlockLabel::Unclassified,
                    reversed: Vec::new(),
                    closed: false,
                });
            }
        }
    }
    Ok(blocks)
}

/// Per-loop sign agreement: `Opposite` when the A and B members own every
/// shared loop with opposite signs, `Same` when with equal signs.
pub fn classify_non_subtraction(block: &SubBlock, surfs: &[SubSurface]) -> Result<Pairing> {
    let mut signs: BTreeMap<usize, (BTreeSet<Sign>, BTreeSet<Sign>)> = BTreeMap::new();
    for &m in &block.surfaces {
        for o in &surfs[m].owners {
            let e = signs.entry(o.loop_id).or_default();
            match surfs[m].source {
                Source::A => e.0.insert(o.sign),
                Source::B => e.1.insert(o.sign),
            };
        }
    }
    let mut verdict = None;
    for (l, (sa, sb)) in signs {
        if sa.len() != 1 || sb.len() != 1 {
            return Err(Error::Topology(format!("loop {l} is not shared by exactly one side of each surface in a block")));
        }
        let v = if sa == sb { Pairing::Same } else { Pairing::Opposite };
        if verdict.is_some_and(|x| x != v) {
            return Err(Error::Topology(format!("block mixes sign relations at loop {l}")));
        }
        verdict = Some(v);
    }
    verdict.ok_or_else(|| Error::Topology("block without loops".into()))
}

/// Everything the classifier needs about the split inputs.
pub struct AssemblyContext<'a> {
    pub points: &'a [Point3],
    pub split_a: &'a SplitSurface,
    pub split_b: &'a SplitSurface,
    pub surfs: &'a [SubSurface],
    pub extrema: [usize; 6],
    /// Original inputs, used by the ray-parity fallback.
    pub a: &'a TriMesh,
    pub b: &'a TriMesh,
}

impl AssemblyContext<'_> {
    fn split(&self, s: Source) -> &SplitSurface {
        match s {
            Source::A => self.split_a,
            Source::B => self.split_b,
        }
    }

    fn triangles_of(&self, r: SurfRef, reverse: bool) -> impl Iterator<Item = Triangle> + '_ {
        let s = &self.surfs[r];
        let split = self.split(s.source);
        s.triangles.iter().map(move |&t| {
            let tri = split.triangles[t];
            if reverse {
                tri.reversed()
            } else {
                tri
            }
        })
    }

    fn block_triangles(&self, b: &SubBlock) -> Vec<Triangle> {
        let mut out = Vec::new();
        for &m in &b.surfaces {
            out.extend(self.triangles_of(m, b.reversed.contains(&m)));
        }
        for (i, t) in out.iter_mut().enumerate() {
            t.id = i;
        }
        out
    }

    /// Output mesh of a block over a compacted vertex set.
    pub fn block_mesh(&self, b: &SubBlock) -> TriMesh {
        let tris = self.block_triangles(b);
        let mut m = TriMesh { vertices: self.points.to_vec(), triangles: tris, closed: false, boundary_loops: Vec::new() };
        m.refresh_topology();
        m.compacted()
    }

    fn vertex_set(&self, b: &SubBlock) -> HashSet<usize> {
        b.surfaces.iter().flat_map(|&m| self.triangles_of(m, false)).flat_map(|t| t.v).collect()
    }

    /// Whether the A members of a candidate lie outside B, judged at the
    /// centroid of their largest triangle.
    fn a_members_outside_b(&self, b: &SubBlock) -> Option<bool> {
        let best = b
            .surfaces
            .iter()
            .filter(|&&m| self.surfs[m].source == Source::A)
            .flat_map(|&m| self.triangles_of(m, false))
            .max_by(|x, y| area(self.points, x).total_cmp(&area(self.points, y)))?;
        let c = (self.points[best.v[0]] + self.points[best.v[1]] + self.points[best.v[2]]) / 3.0;
        Some(!point_inside(c, &self.b.vertices, &self.b.triangles))
    }
}

fn area(points: &[Point3], t: &Triangle) -> f64 {
    (points[t.v[1]] - points[t.v[0]]).cross(points[t.v[2]] - points[t.v[0]]).norm()
}

/// Picks the union among union-or-intersection candidates: the one whose
/// vertices include all six extreme vertices. Falls back to ray parity when
/// the extrema do not single out one candidate.
pub fn pick_union(candidates: &[usize], blocks: &[SubBlock], ctx: &AssemblyContext) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::Classification("no union or intersection candidate".into()));
    }
    let hits: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&c| {
            let vs = ctx.vertex_set(&blocks[c]);
            ctx.extrema.iter().all(|e| vs.contains(e))
        })
        .collect();
    if hits.len() == 1 {
        return Ok(hits[0]);
    }
    warn!("extrema match {} union candidates; falling back to ray parity", hits.len());
    let outside: Vec<usize> =
        candidates.iter().copied().filter(|&c| ctx.a_members_outside_b(&blocks[c]) == Some(true)).collect();
    match outside.as_slice() {
        [u] => Ok(*u),
        _ => Err(Error::Classification(format!("{} candidates qualify as the union", outside.len()))),
    }
}

/// Labels subtraction blocks by their outer or inner members and marks the
/// members to reverse.
pub fn classify_subtractions(blocks: &mut [SubBlock], union: usize, ctx: &AssemblyContext) -> Result<()> {
    let outer: HashSet<SurfRef> = blocks[union].surfaces.iter().copied().collect();
    let inner: HashSet<SurfRef> = blocks
        .iter()
        .filter(|b| b.label == BlockLabel::Intersection)
        .flat_map(|b| b.surfaces.iter().copied())
        .collect();
    for b in blocks.iter_mut().filter(|b| b.pairing == Pairing::Same) {
        let mut label = None;
        for &m in &b.surfaces {
            let src = ctx.surfs[m].source;
            let l = if outer.contains(&m) {
                Some(if src == Source::A { BlockLabel::AMinusB } else { BlockLabel::BMinusA })
            } else if inner.contains(&m) {
                Some(if src == Source::A { BlockLabel::BMinusA } else { BlockLabel::AMinusB })
            } else {
                None
            };
            if let Some(l) = l {
                if label.is_some_and(|x| x != l) {
                    return Err(Error::Classification("subtraction block members disagree".into()));
                }
                label = Some(l);
            }
        }
        let label = label.ok_or_else(|| Error::Classification("block has neither outer nor inner sub-surfaces".into()))?;
        b.label = label;
        b.reversed = b.surfaces.iter().copied().filter(|m| inner.contains(m)).collect();
        if b.reversed.is_empty() {
            // Members outside both union and intersection: reverse the side
            // that is consumed by the subtraction.
            let cut = if label == BlockLabel::AMinusB { Source::B } else { Source::A };
            b.reversed = b.surfaces.iter().copied().filter(|&m| ctx.surfs[m].source == cut).collect();
        }
    }
    Ok(())
}

/// Runs classification for closed inputs and packages the outputs.
pub fn classify_blocks(blocks: &mut [SubBlock], ctx: &AssemblyContext) -> Result<BooleanResult> {
    for b in blocks.iter_mut() {
        let verdict = classify_non_subtraction(b, ctx.surfs)?;
        if verdict != b.pairing {
            return Err(Error::Topology("block sign relation differs from its assembly".into()));
        }
    }
    let candidates: Vec<usize> = (0..blocks.len()).filter(|&i| blocks[i].pairing == Pairing::Opposite).collect();
    let union = pick_union(&candidates, blocks, ctx)?;
    for &c in &candidates {
        blocks[c].label = if c == union { BlockLabel::Union } else { BlockLabel::Intersection };
    }
    classify_subtractions(blocks, union, ctx)?;
    let mut result = BooleanResult::default();
    for b in blocks.iter_mut() {
        let tris = ctx.block_triangles(b);
        b.closed = is_closed_manifold(&tris);
        if !b.closed {
            warn!("{} block {:?} is not a closed manifold", b.label.name(), b.surfaces);
        }
        let mesh = ctx.block_mesh(b);
        match b.label {
            BlockLabel::Union => result.union.push(mesh),
            BlockLabel::Intersection => result.intersection.push(mesh),
            BlockLabel::AMinusB => result.a_minus_b.push(mesh),
            BlockLabel::BMinusA => result.b_minus_a.push(mesh),
            BlockLabel::Unclassified => {}
        }
    }
    info!(
        "classified {} blocks: {} union, {} intersection, {} A-B, {} B-A",
        blocks.len(),
        result.union.len(),
        result.intersection.len(),
        result.a_minus_b.len(),
        result.b_minus_a.len()
    );
    Ok(result)
}

/// Orients blocks that cannot be classified (an input is open): same-sign
/// blocks get their open-surface members reversed, then the whole block is
/// flipped if it encloses negative volume.
pub fn orient_unclassified(blocks: &mut [SubBlock], ctx: &AssemblyContext, open: Source) {
    for b in blocks.iter_mut() {
        b.label = BlockLabel::Unclassified;
        b.reversed = if b.pairing == Pairing::Same {
            b.surfaces.iter().copied().filter(|&m| ctx.surfs[m].source == open).collect()
        } else {
            Vec::new()
        };
        let tris = ctx.block_triangles(b);
        if signed_volume_unchecked(ctx.points, &tris) < 0.0 {
            b.reversed = b.surfaces.iter().copied().filter(|m| !b.reversed.contains(m)).collect();
        }
        b.closed = is_closed_manifold(&ctx.block_triangles(b));
    }
}

fn canonical_faces(tris: &[Triangle], map: &[usize], offset: usize) -> Vec<[usize; 3]> {
    let mut out: Vec<[usize; 3]> = tris
        .iter()
        .map(|t| {
            let v = [map[t.v[0] + offset], map[t.v[1] + offset], map[t.v[2] + offset]];
            let k = (0..3).min_by_key(|&i| v[i]).unwrap();
            [v[k], v[(k + 1) % 3], v[(k + 2) % 3]]
        })
        .collect();
    out.sort_unstable();
    out
}

/// Whether both meshes describe the same triangles after welding at `tol`.
pub fn coincident(a: &TriMesh, b: &TriMesh, tol: f64) -> bool {
    if a.triangles.len() != b.triangles.len() {
        return false;
    }
    let mut raw = a.vertices.clone();
    raw.extend_from_slice(&b.vertices);
    let (_, map) = merge_points(&raw, tol);
    canonical_faces(&a.triangles, &map, 0) == canonical_faces(&b.triangles, &map, a.vertices.len())
}

/// Handles inputs whose surfaces do not cross: coincident, disjoint or
/// nested closed meshes. Returns `None` when the general pipeline applies.
pub fn preprocess_trivial_cases(a: &TriMesh, b: &TriMesh, crossing: bool, tol: f64) -> Result<Option<BooleanResult>> {
    if coincident(a, b, tol) {
        return Err(Error::CoincidentInput);
    }
    if crossing || !a.closed || !b.closed {
        return Ok(None);
    }
    let (a, b) = (a.clone().with_source(Source::A), b.clone().with_source(Source::B));
    let cavity = |outer: &TriMesh, inner: &TriMesh| TriMesh::concat(&[outer.clone(), inner.reversed()]);
    let r = if mesh_inside(&a, &b) {
        info!("A lies inside B");
        BooleanResult { union: vec![b.clone()], intersection: vec![a.clone()], a_minus_b: vec![], b_minus_a: vec![cavity(&b, &a)] }
    } else if mesh_inside(&b, &a) {
        info!("B lies inside A");
        BooleanResult { union: vec![a.clone()], intersection: vec![b.clone()], a_minus_b: vec![cavity(&a, &b)], b_minus_a: vec![] }
    } else {
        info!("inputs are disjoint");
        BooleanResult { union: vec![a.clone(), b.clone()], intersection: vec![], a_minus_b: vec![a], b_minus_a: vec![b] }
    };
    Ok(Some(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subsurface::Owner;

    fn surf(id: usize, source: Source, owners: &[(usize, Sign)], public: bool, boundary: bool) -> SubSurface {
        SubSurface {
            id,
            source,
            triangles: vec![],
            owners: owners.iter().map(|&(l, s)| Owner { loop_id: l, sign: s }).collect(),
            is_public: public,
            has_boundary_loop: boundary,
        }
    }

    #[test]
    fn one_loop_gives_four_blocks() {
        use Sign::*;
        // A_out, A_in, B_in, B_out around a single loop.
        let s = [
            surf(0, Source::A, &[(0, Plus)], false, false),
            surf(1, Source::A, &[(0, Minus)], false, false),
            surf(0, Source::B, &[(0, Plus)], false, false),
            surf(1, Source::B, &[(0, Minus)], false, false),
        ];
        let b = assemble_blocks(&s).unwrap();
        let sets: Vec<(Vec<usize>, Pairing)> = b.iter().map(|x| (x.surfaces.clone(), x.pairing)).collect();
        assert_eq!(
            sets,
            vec![
                (vec![0, 3], Pairing::Opposite),
                (vec![1, 2], Pairing::Opposite),
                (vec![0, 2], Pairing::Same),
                (vec![1, 3], Pairing::Same),
            ]
        );
        for x in &b {
            assert_eq!(classify_non_subtraction(x, &s).unwrap(), x.pairing);
        }
    }

    #[test]
    fn boundary_public_surfaces_are_skipped() {
        use Sign::*;
        // Closed blob with three legs cut by an open plane.
        let s = [
            surf(0, Source::A, &[(0, Plus)], false, false),
            surf(1, Source::A, &[(1, Plus)], false, false),
            surf(2, Source::A, &[(2, Plus)], false, false),
            surf(3, Source::A, &[(0, Minus), (1, Minus), (2, Minus)], true, false),
            surf(0, Source::B, &[(0, Minus)], false, false),
            surf(1, Source::B, &[(1, Minus)], false, false),
            surf(2, Source::B, &[(2, Minus)], false, false),
            surf(3, Source::B, &[(0, Plus), (1, Plus), (2, Plus)], true, true),
        ];
        let b = assemble_blocks(&s).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.iter().any(|x| x.surfaces == vec![3, 4, 5, 6]));
        assert!(b.iter().all(|x| !x.surfaces.contains(&7)));
    }

    #[test]
    fn missing_partner_is_an_error() {
        let s = [surf(0, Source::A, &[(4, Sign::Plus)], false, false)];
        assert!(matches!(assemble_blocks(&s), Err(Error::Assembly { loop_id: 4 })));
    }

    #[test]
    fn mixed_signs_are_rejected() {
        use Sign::*;
        let s = [
            surf(0, Source::A, &[(0, Plus), (1, Plus)], true, false),
            surf(0, Source::B, &[(0, Minus), (1, Plus)], true, false),
        ];
        let blk = SubBlock { surfaces: vec![0, 1], pairing: Pairing::Opposite, label: BlockLabel::Unclassified, reversed: vec![], closed: false };
        assert!(matches!(classify_non_subtraction(&blk, &s), Err(Error::Topology(_))));
    }

    fn vol(ms: &[TriMesh]) -> f64 {
        ms.iter().map(|m| crate::geometry::signed_volume(m).unwrap()).sum()
    }

    #[test]
    fn trivial_cases() {
        use crate::shapes::box_fan;
        let p = Point3::new;
        let small = box_fan(p(0., 0., 0.), p(1., 1., 1.));
        let big = box_fan(p(-1., -1., -1.), p(2., 2., 2.)).with_source(Source::B);
        let far = box_fan(p(5., 5., 5.), p(6., 6., 6.)).with_source(Source::B);
        assert!(matches!(preprocess_trivial_cases(&small, &small, false, 1e-9), Err(Error::CoincidentInput)));
        let r = preprocess_trivial_cases(&small, &far, false, 1e-9).unwrap().unwrap();
        assert_eq!(r.union.len(), 2);
        assert!(r.intersection.is_empty());
        let r = preprocess_trivial_cases(&small, &big, false, 1e-9).unwrap().unwrap();
        assert!((vol(&r.intersection) - 1.0).abs() < 1e-12);
        assert!((vol(&r.b_minus_a) - 26.0).abs() < 1e-12);
        assert!(r.a_minus_b.is_empty());
        assert!(preprocess_trivial_cases(&small, &big, true, 1e-9).unwrap().is_none());
    }
}
