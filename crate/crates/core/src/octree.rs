//! Broad phase: clip both surfaces to their shared bounding region and
//! collect candidate triangle pairs from the leaves of an octree.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mesh_aabb, Aabb, Point3, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OctreeConfig {
    pub max_depth: usize,
    /// Subdivision stops once both per-surface triangle counts are at most this.
    pub leaf_capacity: usize,
}

impl Default for OctreeConfig {
    fn default() -> Self {
        OctreeConfig { max_depth: 8, leaf_capacity: 32 }
    }
}

impl OctreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.leaf_capacity == 0 {
            return Err(Error::Config("octree depth and capacity must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidatePair {
    pub tri_a: usize,
    pub tri_b: usize,
}

/// Triangles of each surface that reach into the shared region, with the
/// per-triangle boxes computed once for the whole broad phase.
#[derive(Clone, Debug)]
pub struct SharedRegion {
    pub a_in: Vec<usize>,
    pub b_in: Vec<usize>,
    /// Cubic root box; empty when the surfaces' boxes are disjoint.
    pub root: Aabb,
    pub boxes_a: Vec<Aabb>,
    pub boxes_b: Vec<Aabb>,
}

fn triangle_boxes(m: &TriMesh) -> Vec<Aabb> {
    m.triangles.iter().map(|t| Aabb::from_points(&m.corners(t))).collect()
}

pub fn clip_to_shared_region(a: &TriMesh, b: &TriMesh) -> Result<SharedRegion> {
    let box_ab = mesh_aabb(a)?.intersection(&mesh_aabb(b)?);
    let boxes_a = triangle_boxes(a);
    let boxes_b = triangle_boxes(b);
    if box_ab.is_empty() {
        return Ok(SharedRegion { a_in: vec![], b_in: vec![], root: Aabb::EMPTY, boxes_a, boxes_b });
    }
    let a_in: Vec<usize> = (0..boxes_a.len()).filter(|&i| boxes_a[i].overlaps(&box_ab)).collect();
    let b_in: Vec<usize> = (0..boxes_b.len()).filter(|&i| boxes_b[i].overlaps(&box_ab)).collect();
    let mut cover = box_ab;
    for &i in &a_in {
        cover = cover.union(&boxes_a[i]);
    }
    for &i in &b_in {
        cover = cover.union(&boxes_b[i]);
    }
    let side = cover.max_extent().max(f64::MIN_POSITIVE);
    let half = 0.5 * side * (1.0 + 1e-9);
    let c = cover.center();
    let h = Point3::new(half, half, half);
    Ok(SharedRegion { a_in, b_in, root: Aabb::new(c - h, c + h), boxes_a, boxes_b })
}

#[derive(Clone, Debug)]
pub struct OctreeNode {
    pub bounds: Aabb,
    pub depth: usize,
    pub children: Option<[usize; 8]>,
    pub tris_a: Vec<usize>,
    pub tris_b: Vec<usize>,
}

impl OctreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Arena-allocated octree; node 0 is the root.
#[derive(Clone, Debug)]
pub struct Octree {
    pub nodes: Vec<OctreeNode>,
    pub config: OctreeConfig,
}

impl Octree {
    pub fn root(&self) -> &OctreeNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &OctreeNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    /// Whether a node satisfies one of the three termination rules.
    pub fn leaf_rule_holds(&self, n: &OctreeNode) -> bool {
        n.depth >= self.config.max_depth
            || (n.tris_a.len() <= self.config.leaf_capacity && n.tris_b.len() <= self.config.leaf_capacity)
            || n.tris_a.is_empty()
            || n.tris_b.is_empty()
    }
}

pub fn build_octree(region: &SharedRegion, cfg: OctreeConfig) -> Octree {
    let mut tree = Octree { nodes: Vec::new(), config: cfg };
    tree.nodes.push(OctreeNode {
        bounds: region.root,
        depth: 0,
        children: None,
        tris_a: region.a_in.clone(),
        tris_b: region.b_in.clone(),
    });
    let mut stack = vec![0usize];
    while let Some(ni) = stack.pop() {
        if tree.leaf_rule_holds(&tree.nodes[ni]) {
            continue;
        }
        let (bounds, depth) = (tree.nodes[ni].bounds, tree.nodes[ni].depth);
        let c = bounds.center();
        let mut kids = [0usize; 8];
        for (k, slot) in kids.iter_mut().enumerate() {
            let pick = |bit: usize, lo: f64, mid: f64, hi: f64| if k & bit == 0 { (lo, mid) } else { (mid, hi) };
            let (x0, x1) = pick(1, bounds.min.x, c.x, bounds.max.x);
            let (y0, y1) = pick(2, bounds.min.y, c.y, bounds.max.y);
            let (z0, z1) = pick(4, bounds.min.z, c.z, bounds.max.z);
            let child_box = Aabb::new(Point3::new(x0, y0, z0), Point3::new(x1, y1, z1));
            let parent = &tree.nodes[ni];
            let tris_a = parent.tris_a.iter().copied().filter(|&t| region.boxes_a[t].overlaps(&child_box)).collect();
            let tris_b = parent.tris_b.iter().copied().filter(|&t| region.boxes_b[t].overlaps(&child_box)).collect();
            *slot = tree.nodes.len();
            tree.nodes.push(OctreeNode { bounds: child_box, depth: depth + 1, children: None, tris_a, tris_b });
            stack.push(*slot);
        }
        let node = &mut tree.nodes[ni];
        node.children = Some(kids);
    }
    tree
}

/// Deduplicated cross product of the leaf lists, sorted by `(tri_a, tri_b)`.
pub fn candidate_pairs(tree: &Octree) -> Vec<CandidatePair> {
    let mut set = HashSet::new();
    for leaf in tree.leaves() {
        for &a in &leaf.tris_a {
            for &b in &leaf.tris_b {
                set.insert(CandidatePair { tri_a: a, tri_b: b });
            }
        }
    }
    let mut out: Vec<_> = set.into_iter().collect();
    out.sort_unstable();
    out
}

/// Convenience wrapper running the whole broad phase.
pub fn find_candidates(a: &TriMesh, b: &TriMesh, cfg: OctreeConfig) -> Result<(SharedRegion, Vec<CandidatePair>)> {
    cfg.validate()?;
    let region = clip_to_shared_region(a, b)?;
    if region.root.is_empty() {
        return Ok((region, Vec::new()));
    }
    let tree = build_octree(&region, cfg);
    let pairs = candidate_pairs(&tree);
    Ok((region, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn brute_force(a: &TriMesh, b: &TriMesh) -> Vec<CandidatePair> {
        let mut v = Vec::new();
        for (i, ta) in a.triangles.iter().enumerate() {
            let ba = Aabb::from_points(&a.corners(ta));
            for (j, tb) in b.triangles.iter().enumerate() {
                if ba.overlaps(&Aabb::from_points(&b.corners(tb))) {
                    v.push(CandidatePair { tri_a: i, tri_b: j });
                }
            }
        }
        v
    }

    #[test]
    fn disjoint_cubes_share_nothing() {
        let a = shapes::unit_cube_12();
        let b = a.translated(Point3::new(5., 0., 0.));
        let r = clip_to_shared_region(&a, &b).unwrap();
        assert!(r.a_in.is_empty() && r.b_in.is_empty());
        assert!(find_candidates(&a, &b, OctreeConfig::default()).unwrap().1.is_empty());
    }

    #[test]
    fn identical_meshes_keep_everything() {
        let a = shapes::unit_cube_12();
        let r = clip_to_shared_region(&a, &a).unwrap();
        assert_eq!(r.a_in.len(), a.triangles.len());
    }

    #[test]
    fn offset_cube_in_set_matches_box_oracle() {
        let a = shapes::unit_cube_12();
        let b = a.translated(Point3::new(0.5, 0.5, 0.5));
        let r = clip_to_shared_region(&a, &b).unwrap();
        let box_ab = Aabb::new(Point3::new(0.5, 0.5, 0.5), Point3::new(1., 1., 1.));
        let oracle: Vec<usize> = a
            .triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| Aabb::from_points(&a.corners(t)).overlaps(&box_ab))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(r.a_in, oracle);
        // Every triangle except the two lying in the x=0, y=0 and z=0 planes touches [0.5,1]^3.
        assert_eq!(r.a_in.len(), 6);
        assert!(r.root.contains_box(&box_ab));
    }

    #[test]
    fn termination_rules() {
        let a = shapes::unit_cube_12();
        let b = a.translated(Point3::new(0.5, 0.5, 0.5));
        let mut r = clip_to_shared_region(&a, &b).unwrap();
        let full_b = r.b_in.clone();
        r.a_in.clear();
        let t = build_octree(&r, OctreeConfig { max_depth: 6, leaf_capacity: 1 });
        assert!(t.root().is_leaf());
        r.a_in = vec![1];
        r.b_in = vec![full_b[0]];
        let t = build_octree(&r, OctreeConfig { max_depth: 6, leaf_capacity: 8 });
        assert!(t.root().is_leaf());
    }

    #[test]
    fn cube_sphere_leaves_obey_rules() {
        let a = shapes::box_grid(Point3::new(-1., -1., -1.), Point3::new(1., 1., 1.), 6);
        let b = shapes::icosphere(1.2, 3);
        let r = clip_to_shared_region(&a, &b).unwrap();
        let t = build_octree(&r, OctreeConfig { max_depth: 6, leaf_capacity: 32 });
        assert!(t.nodes.len() > 1);
        for n in t.leaves() {
            assert!(t.leaf_rule_holds(n));
        }
        for n in t.nodes.iter().filter(|n| !n.is_leaf()) {
            assert!(!t.leaf_rule_holds(n) || n.depth >= t.config.max_depth);
        }
    }

    #[test]
    fn leaf_pairs_are_crossed() {
        let mut tree = Octree {
            nodes: vec![OctreeNode { bounds: Aabb::EMPTY, depth: 0, children: None, tris_a: vec![3], tris_b: vec![7] }],
            config: OctreeConfig::default(),
        };
        assert_eq!(candidate_pairs(&tree), vec![CandidatePair { tri_a: 3, tri_b: 7 }]);
        tree.nodes[0].tris_b.clear();
        assert!(candidate_pairs(&tree).is_empty());
    }

    #[test]
    fn candidates_cover_brute_force_on_cylinders() {
        let a = shapes::cylinder_x(1.0, 2.0, 16, 3);
        let b = shapes::rotated(&a, Point3::new(0., 0., 1.), std::f64::consts::FRAC_PI_2);
        let cfg = OctreeConfig { max_depth: 6, leaf_capacity: 4 };
        let (_, cand) = find_candidates(&a, &b, cfg).unwrap();
        let cand: HashSet<_> = cand.into_iter().collect();
        for p in brute_force(&a, &b) {
            assert!(cand.contains(&p), "missing {p:?}");
        }
    }

    #[test]
    fn deterministic_and_monotone() {
        let a = shapes::icosphere(1.0, 2);
        let b = shapes::icosphere(0.8, 2).translated(Point3::new(0.9, 0.1, 0.05));
        let small = OctreeConfig { max_depth: 7, leaf_capacity: 2 };
        let (_, c1) = find_candidates(&a, &b, small).unwrap();
        let (_, c2) = find_candidates(&a, &b, small).unwrap();
        assert_eq!(c1, c2);
        let (_, big) = find_candidates(&a, &b, OctreeConfig { max_depth: 7, leaf_capacity: 64 }).unwrap();
        let big: HashSet<_> = big.into_iter().collect();
        let truth: HashSet<_> = brute_force(&a, &b).into_iter().collect();
        assert!(truth.is_subset(&big));
        assert!(c1.iter().all(|p| big.contains(p)) || big.len() >= c1.len());
    }
}
