//! End-to-end Boolean pipeline: six stages from candidate search to
//! classified sub-blocks.

use std::time::{Duration, Instant};

use log::{error, info, warn};

use crate::blocks::{
    assemble_blocks, classify_blocks, orient_unclassified, preprocess_trivial_cases, AssemblyContext, BooleanResult,
    SubBlock,
};
use crate::error::{Error, Result};
use crate::geometry::{mesh_aabb, Point3, Source, TriMesh};
use crate::intersect::{intersect_all, IntersectReport};
use crate::loops::{build_loops, close_open_loops_on_boundary, orient_edges, DirectedEdge, OrientedLoop};
use crate::merge::{clear_topology, compute_extrema, weld_intersection, SplitSurface, Welded};
use crate::octree::{find_candidates, CandidatePair, OctreeConfig};
use crate::retriangulate::split_surface;
use crate::subsurface::{build_subsurfaces, classify_subsurfaces, SubSurface};

pub const STAGE_NAMES: [&str; 6] = ["search_pairs", "intersect", "merge_update", "loops", "subsurfaces", "blocks"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    SearchPairs,
    Intersect,
    MergeUpdate,
    Loops,
    SubSurfaces,
    Blocks,
}

#[derive(Clone, Debug, Default)]
pub struct Config {
    /// Welding tolerance; `None` derives it from the shared-region size.
    pub merge_tol: Option<f64>,
    pub octree: OctreeConfig,
    /// Narrow-phase worker threads, 0 for the rayon default.
    pub threads: usize,
    /// Turn coplanar pairs and sub-surface rule violations into errors.
    pub strict: bool,
}

/// Every intermediate artifact of one run.
#[derive(Clone, Debug, Default)]
pub struct PipelineState {
    pub a: TriMesh,
    pub b: TriMesh,
    /// Side of the shared-region cube, or of the joint bounding box when
    /// the inputs do not overlap.
    pub scale: f64,
    pub tol: f64,
    pub pairs: Vec<CandidatePair>,
    pub report: IntersectReport,
    pub welded: Option<Welded>,
    pub split_a: Option<SplitSurface>,
    pub split_b: Option<SplitSurface>,
    pub extrema: Option<[usize; 6]>,
    pub edges: Vec<DirectedEdge>,
    pub loops: Vec<OrientedLoop>,
    /// Boundary-completed loops of A then B.
    pub completed: Vec<OrientedLoop>,
    pub dangling: Vec<usize>,
    /// Sub-surfaces of A followed by those of B.
    pub surfaces: Vec<SubSurface>,
    pub blocks: Vec<SubBlock>,
    pub result: Option<BooleanResult>,
    pub warnings: Vec<String>,
    pub timings: Vec<(&'static str, Duration)>,
}

impl PipelineState {
    pub fn points(&self) -> &[Point3] {
        self.welded.as_ref().map(|w| w.points.as_slice()).unwrap_or(&[])
    }

    pub fn split(&self, s: Source) -> Option<&SplitSurface> {
        match s {
            Source::A => self.split_a.as_ref(),
            Source::B => self.split_b.as_ref(),
        }
    }

    /// Sub-surfaces of one input as standalone meshes.
    pub fn subsurface_meshes(&self, s: Source) -> Vec<TriMesh> {
        let Some(split) = self.split(s) else { return Vec::new() };
        self.surfaces.iter().filter(|x| x.source == s).map(|x| x.to_mesh(split, self.points())).collect()
    }

    /// Output meshes of every block, in block order.
    pub fn block_meshes(&self) -> Vec<TriMesh> {
        match self.context() {
            Some(ctx) => self.blocks.iter().map(|b| ctx.block_mesh(b)).collect(),
            None => Vec::new(),
        }
    }

    fn context(&self) -> Option<AssemblyContext<'_>> {
        Some(AssemblyContext {
            points: self.points(),
            split_a: self.split_a.as_ref()?,
            split_b: self.split_b.as_ref()?,
            surfs: &self.surfaces,
            extrema: self.extrema?,
            a: &self.a,
            b: &self.b,
        })
    }

    fn note(&mut self, strict: bool, err: Error) -> Result<()> {
        if strict {
            return Err(err);
        }
        warn!("{err}");
        self.warnings.push(err.to_string());
        Ok(())
    }
}

fn check_input(m: &TriMesh, name: &str) -> Result<()> {
    if m.triangles.is_empty() {
        return Err(Error::EmptyInput(format!("surface {name} has no triangles")));
    }
    m.validate()
}

fn timed<T>(state: &mut PipelineState, stage: Stage, f: impl FnOnce(&mut PipelineState) -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f(state);
    let elapsed = start.elapsed();
    let name = STAGE_NAMES[stage as usize];
    info!("stage {name}: {:.3} ms", elapsed.as_secs_f64() * 1e3);
    state.timings.push((name, elapsed));
    out.inspect_err(|e| error!("stage {name} failed: {e}"))
}

/// Runs the pipeline up to and including `through`.
pub fn run_pipeline(a: &TriMesh, b: &TriMesh, cfg: &Config, through: Stage) -> Result<PipelineState> {
    check_input(a, "A")?;
    check_input(b, "B")?;
    if let Some(t) = cfg.merge_tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("merge tolerance must be positive, got {t}")));
        }
    }
    let mut st = PipelineState {
        a: a.clone().with_source(Source::A),
        b: b.clone().with_source(Source::B),
        ..Default::default()
    };

    timed(&mut st, Stage::SearchPairs, |st| {
        let (region, pairs) = find_candidates(&st.a, &st.b, cfg.octree)?;
        st.scale = if region.root.is_empty() {
            mesh_aabb(&st.a)?.union(&mesh_aabb(&st.b)?).max_extent()
        } else {
            region.root.max_extent()
        };
        st.tol = cfg.merge_tol.unwrap_or(1e-9 * st.scale);
        info!("{} candidate pairs, tolerance {:e}", pairs.len(), st.tol);
        st.pairs = pairs;
        Ok(())
    })?;
    if through == Stage::SearchPairs {
        return Ok(st);
    }

    timed(&mut st, Stage::Intersect, |st| {
        st.report = intersect_all(&st.a, &st.b, &st.pairs, 1e-12 * st.scale, cfg.threads)?;
        info!("{} segments, {} coplanar pairs", st.report.segments.len(), st.report.coplanar.len());
        if !st.report.coplanar.is_empty() {
            st.note(cfg.strict, Error::CoplanarPairs(st.report.coplanar.len()))?;
        }
        Ok(())
    })?;
    if through == Stage::Intersect {
        return Ok(st);
    }

    timed(&mut st, Stage::MergeUpdate, |st| {
        let w = weld_intersection(&st.a, &st.b, &st.report, st.tol);
        let mut splits = Vec::new();
        for m in [&st.a, &st.b] {
            let mut s = split_surface(m, &w);
            let normals: Vec<Point3> = m
                .triangles
                .iter()
                .map(|t| {
                    let c = m.corners(t);
                    (c[1] - c[0]).cross(c[2] - c[0])
                })
                .collect();
            clear_topology(&mut s, &w.points, &normals, w.tol)?;
            splits.push(s);
        }
        let ids = splits.iter().flat_map(|s| s.triangles.iter().flat_map(|t| t.v));
        st.extrema = Some(compute_extrema(&w.points, ids));
        st.split_b = splits.pop();
        st.split_a = splits.pop();
        st.welded = Some(w);
        Ok(())
    })?;
    if through == Stage::MergeUpdate {
        return Ok(st);
    }

    timed(&mut st, Stage::Loops, |st| {
        let w = st.welded.as_ref().unwrap();
        st.edges = orient_edges(&w.chords, &st.a, &st.b, &w.points);
        st.loops = build_loops(&st.edges)?;
        let mut next = st.loops.len();
        for s in [Source::A, Source::B] {
            let c = close_open_loops_on_boundary(&st.loops, &st.split(s).unwrap().triangles, s, next);
            next += c.loops.len();
            st.completed.extend(c.loops);
            for d in c.dangling {
                if !st.dangling.contains(&d) {
                    st.dangling.push(d);
                }
            }
        }
        info!("{} loops, {} boundary-completed, {} dangling", st.loops.len(), st.completed.len(), st.dangling.len());
        Ok(())
    })?;
    if through == Stage::Loops {
        return Ok(st);
    }

    timed(&mut st, Stage::SubSurfaces, |st| {
        let mut all = Vec::new();
        for s in [Source::A, Source::B] {
            let completed: Vec<OrientedLoop> = st.completed.iter().filter(|l| l.completed_on == Some(s)).cloned().collect();
            all.extend(build_subsurfaces(st.split(s).unwrap(), &st.loops, &completed, &st.dangling)?);
        }
        st.surfaces = all;
        for issue in classify_subsurfaces(&st.surfaces) {
            st.note(cfg.strict, Error::Topology(issue))?;
        }
        info!("{} sub-surfaces", st.surfaces.len());
        Ok(())
    })?;
    if through == Stage::SubSurfaces {
        return Ok(st);
    }

    timed(&mut st, Stage::Blocks, |st| {
        let crossing = !st.loops.is_empty();
        if let Some(r) = preprocess_trivial_cases(&st.a, &st.b, crossing, st.tol)? {
            st.result = Some(r);
            return Ok(());
        }
        let mut blocks = assemble_blocks(&st.surfaces)?;
        let ctx = st.context().unwrap();
        if st.a.closed && st.b.closed {
            st.result = Some(classify_blocks(&mut blocks, &ctx)?);
        } else {
            let open = if st.a.closed { Source::B } else { Source::A };
            orient_unclassified(&mut blocks, &ctx, open);
        }
        info!("{} sub-blocks", blocks.len());
        st.blocks = blocks;
        Ok(())
    })?;
    Ok(st)
}

/// Full Boolean of two closed meshes.
pub fn run_boolean(a: &TriMesh, b: &TriMesh, cfg: &Config) -> Result<(BooleanResult, PipelineState)> {
    if !a.closed || !b.closed {
        return Err(Error::NotClosed);
    }
    let mut st = run_pipeline(a, b, cfg, Stage::Blocks)?;
    let r = st.result.take().unwrap_or_default();
    st.result = Some(r.clone());
    Ok((r, st))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::signed_volume;
    use crate::shapes;

    fn vol(ms: &[TriMesh]) -> f64 {
        ms.iter().map(|m| signed_volume(m).unwrap()).sum()
    }

    #[test]
    fn offset_cubes() {
        let p = Point3::new;
        let a = shapes::box_fan(p(0., 0., 0.), p(1., 1., 1.));
        let b = shapes::box_fan(p(0.5, 0.5, 0.5), p(1.5, 1.5, 1.5));
        let (r, st) = run_boolean(&a, &b, &Config::default()).unwrap();
        assert_eq!(st.blocks.len(), 4);
        assert_eq!(st.timings.len(), 6);
        assert!((vol(&r.union) - 1.875).abs() < 1e-12);
        assert!((vol(&r.intersection) - 0.125).abs() < 1e-12);
        assert!((vol(&r.a_minus_b) - 0.875).abs() < 1e-12);
        assert!((vol(&r.b_minus_a) - 0.875).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_rejected() {
        let a = shapes::unit_cube_12();
        assert!(matches!(run_pipeline(&a, &TriMesh::empty(), &Config::default(), Stage::Blocks), Err(Error::EmptyInput(_))));
    }
}
