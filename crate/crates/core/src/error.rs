use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the Boolean pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("surface is not closed")]
    NotClosed,

    #[error("parse error in {path}: {msg} (at {location})")]
    Parse {
        path: PathBuf,
        location: String,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("degenerate triangle {tri} on surface {surface}")]
    DegenerateTriangle { surface: char, tri: usize },

    #[error("coplanar overlapping triangle pairs: {0} (strict mode)")]
    CoplanarPairs(usize),

    #[error("degenerate polygon (zero area)")]
    DegeneratePolygon,

    #[error("polygon is not simple")]
    NotSimple,

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("open loop {loop_id} does not end on the surface boundary")]
    DanglingLoop { loop_id: usize },

    #[error("no partner sub-surface for loop {loop_id}")]
    Assembly { loop_id: usize },

    #[error("classification error: {0}")]
    Classification(String),

    #[error("inputs are coincident")]
    CoincidentInput,

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Process exit code for the failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io { .. } | Error::EmptyInput(_) | Error::Config(_) => 2,
            Error::DegenerateTriangle { .. }
            | Error::CoplanarPairs(_)
            | Error::DegeneratePolygon
            | Error::NotSimple
            | Error::Geometry(_)
            | Error::NotClosed => 3,
            Error::Topology(_) | Error::DanglingLoop { .. } | Error::Assembly { .. } => 4,
            Error::Classification(_) | Error::CoincidentInput => 5,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
