//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, ValueEnum};
use log::{info, warn};

use crate::error::{Error, Result};
use crate::geometry::{Source, TriMesh};
use crate::io::{dump_debug, load_path, save_path};
use crate::octree::OctreeConfig;
use crate::pipeline::{run_pipeline, Config, PipelineState, Stage, STAGE_NAMES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Op {
    Union,
    Intersect,
    SubtractAb,
    SubtractBa,
    All,
    SplitSurfaces,
    IntersectOpen,
}

#[derive(Debug, Parser)]
#[command(name = "meshbool", version, about = "Boolean operations on triangulated surfaces")]
pub struct Cli {
    /// `[OP] INPUT_A INPUT_B`; OP may also be given with --op.
    #[arg(num_args = 2..=3, required = true, value_name = "ARGS")]
    pub args: Vec<String>,

    #[arg(long, value_enum)]
    pub op: Option<Op>,

    /// Output file, or directory for `all`, `split-surfaces` and `intersect-open`.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,

    #[arg(long)]
    pub merge_tol: Option<f64>,

    #[arg(long, default_value_t = OctreeConfig::default().max_depth)]
    pub octree_depth: usize,

    #[arg(long, default_value_t = OctreeConfig::default().leaf_capacity)]
    pub octree_capacity: usize,

    /// Narrow-phase worker threads (0 = one per core).
    #[arg(long, env = "MESHBOOL_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Fail on coplanar pairs and sub-surface rule violations.
    #[arg(long)]
    pub strict: bool,

    /// Write the pipeline state as JSON to this path.
    #[arg(long)]
    pub debug_json: Option<PathBuf>,
}

/// Validated run parameters.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub op: Op,
    pub input_a: PathBuf,
    pub input_b: PathBuf,
    pub output: PathBuf,
    pub pipeline: Config,
    pub debug_json: Option<PathBuf>,
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        let (positional_op, a, b) = match self.args.as_slice() {
            [a, b] => (None, a, b),
            [op, a, b] => {
                let op = Op::from_str(op, true).map_err(|_| Error::Config(format!("unknown operation '{op}'")))?;
                (Some(op), a, b)
            }
            _ => return Err(Error::Config("expected [OP] INPUT_A INPUT_B".into())),
        };
        let op = match (positional_op, self.op) {
            (Some(x), Some(y)) if x != y => return Err(Error::Config("conflicting operations".into())),
            (x, y) => x.or(y).unwrap_or(Op::All),
        };
        let output = match (self.out, op) {
            (Some(o), _) => o,
            (None, Op::All | Op::SplitSurfaces | Op::IntersectOpen) => {
                return Err(Error::Config("this operation needs an output directory (--out)".into()))
            }
            (None, _) => PathBuf::from("out.stl"),
        };
        let octree = OctreeConfig { max_depth: self.octree_depth, leaf_capacity: self.octree_capacity };
        octree.validate()?;
        Ok(RunConfig {
            op,
            input_a: a.into(),
            input_b: b.into(),
            output,
            pipeline: Config { merge_tol: self.merge_tol, octree, threads: self.threads, strict: self.strict },
            debug_json: self.debug_json,
        })
    }
}

fn report_timings(timings: &[(&'static str, Duration)]) {
    for (i, name) in STAGE_NAMES.iter().enumerate() {
        match timings.get(i) {
            Some((_, d)) => eprintln!("stage {}/6 {name:<13} {:>10.3} ms", i + 1, d.as_secs_f64() * 1e3),
            None => eprintln!("stage {}/6 {name:<13}    skipped", i + 1),
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })
}

fn save_all(dir: &Path, prefix: &str, meshes: &[TriMesh]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for (i, m) in meshes.iter().enumerate() {
        let p = dir.join(format!("{prefix}_{i}.stl"));
        save_path(m, &p)?;
        out.push(p);
    }
    Ok(out)
}

fn save_joined(path: &Path, meshes: &[TriMesh]) -> Result<()> {
    if meshes.is_empty() {
        warn!("{} is empty", path.display());
    }
    save_path(&TriMesh::concat(meshes), path)
}

fn write_subsurfaces(st: &PipelineState, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    for s in [Source::A, Source::B] {
        let prefix = format!("{}_sub", s.tag().to_ascii_lowercase());
        let files = save_all(dir, &prefix, &st.subsurface_meshes(s))?;
        info!("wrote {} sub-surfaces of {}", files.len(), s.tag());
    }
    Ok(())
}

/// Executes one run; returns the pipeline state for inspection.
pub fn run(cfg: &RunConfig) -> Result<PipelineState> {
    let a = load_path(&cfg.input_a, Source::A)?;
    let b = load_path(&cfg.input_b, Source::B)?;
    let both_closed = a.closed && b.closed;
    match cfg.op {
        Op::SplitSurfaces | Op::IntersectOpen => {}
        _ if !both_closed => {
            return Err(Error::Config("Boolean operations need two closed inputs; use intersect-open or split-surfaces".into()))
        }
        _ => {}
    }
    if cfg.op == Op::IntersectOpen && both_closed {
        return Err(Error::Config("intersect-open expects at least one open input".into()));
    }
    let through = if cfg.op == Op::SplitSurfaces { Stage::SubSurfaces } else { Stage::Blocks };
    let st = run_pipeline(&a, &b, &cfg.pipeline, through)?;
    report_timings(&st.timings);
    if let Some(p) = &cfg.debug_json {
        dump_debug(&st, p)?;
    }
    let out = &cfg.output;
    match cfg.op {
        Op::SplitSurfaces => write_subsurfaces(&st, out)?,
        Op::IntersectOpen => {
            write_subsurfaces(&st, out)?;
            save_all(out, "block", &st.block_meshes())?;
        }
        op => {
            let r = st.result.clone().unwrap_or_default();
            match op {
                Op::Union => save_joined(out, &r.union)?,
                Op::Intersect => save_joined(out, &r.intersection)?,
                Op::SubtractAb => save_joined(out, &r.a_minus_b)?,
                Op::SubtractBa => save_joined(out, &r.b_minus_a)?,
                _ => {
                    ensure_dir(out)?;
                    save_joined(&out.join("union.stl"), &r.union)?;
                    save_joined(&out.join("intersection.stl"), &r.intersection)?;
                    save_all(out, "a_minus_b", &r.a_minus_b)?;
                    save_all(out, "b_minus_a", &r.b_minus_a)?;
                }
            }
        }
    }
    Ok(st)
}

/// Parses arguments, runs, and maps failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.into_config().and_then(|cfg| run(&cfg)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
