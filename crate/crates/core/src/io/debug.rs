use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blocks::BlockLabel;
use crate::error::{Error, Result};
use crate::geometry::Source;
use crate::loops::LoopKind;
use crate::pipeline::PipelineState;
use crate::subsurface::Sign;

pub const DEBUG_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebugLoop {
    pub id: usize,
    pub verts: Vec<usize>,
    pub kind: LoopKind,
    pub closed: bool,
    pub completed_on: Option<Source>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebugOwner {
    #[serde(rename = "loop")]
    pub loop_id: usize,
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebugSurface {
    pub id: usize,
    pub source: Source,
    pub tris: Vec<usize>,
    pub owners: Vec<DebugOwner>,
    pub public: bool,
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebugBlock {
    /// Indices into `surfaces`.
    pub surfaces: Vec<usize>,
    pub label: BlockLabel,
    pub closed: bool,
}

/// Versioned snapshot of the index-level pipeline state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebugDocument {
    pub version: u32,
    pub vertices: Vec<[f64; 3]>,
    /// `[head, tail, tri_a, tri_b]`.
    pub edges: Vec<[usize; 4]>,
    pub loops: Vec<DebugLoop>,
    pub surfaces: Vec<DebugSurface>,
    pub blocks: Vec<DebugBlock>,
}

impl DebugDocument {
    pub fn from_state(st: &PipelineState) -> Self {
        let edges = st
            .edges
            .iter()
            .map(|e| {
                let (ta, tb) = e.owners.first().copied().unwrap_or((usize::MAX, usize::MAX));
                [e.head, e.tail, ta, tb]
            })
            .collect();
        let loops = st
            .loops
            .iter()
            .chain(&st.completed)
            .map(|l| DebugLoop {
                id: l.id,
                verts: l.verts.clone(),
                kind: l.kind,
                closed: l.is_cycle() || l.kind != LoopKind::Open,
                completed_on: l.completed_on,
            })
            .collect();
        let surfaces = st
            .surfaces
            .iter()
            .map(|s| DebugSurface {
                id: s.id,
                source: s.source,
                tris: s.triangles.clone(),
                owners: s.owners.iter().map(|o| DebugOwner { loop_id: o.loop_id, sign: o.sign }).collect(),
                public: s.is_public,
                boundary: s.has_boundary_loop,
            })
            .collect();
        let blocks =
            st.blocks.iter().map(|b| DebugBlock { surfaces: b.surfaces.clone(), label: b.label, closed: b.closed }).collect();
        DebugDocument {
            version: DEBUG_SCHEMA_VERSION,
            vertices: st.points().iter().map(|p| p.to_array()).collect(),
            edges,
            loops,
            surfaces,
            blocks,
        }
    }
}

pub fn dump_debug(state: &PipelineState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let doc = DebugDocument::from_state(state);
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io { path: path.into(), source: e.into() })?;
    fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}
