use std::fmt::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point3, TriMesh};

/// Parses `v` and `f` statements; polygons are fan-triangulated.
pub(super) fn parse(text: &str, path: &Path) -> Result<(Vec<Point3>, Vec<[usize; 3]>)> {
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    let mut warned_attr = false;
    let mut warned_poly = false;
    let err = |ln: usize, msg: String| Error::Parse { path: path.to_path_buf(), location: format!("line {ln}"), msg };
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.split('#').next().unwrap_or("");
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut c = [0.0f64; 3];
                for slot in &mut c {
                    let t = it.next().ok_or_else(|| err(ln, "vertex needs 3 coordinates".into()))?;
                    *slot = t.parse().map_err(|_| err(ln, format!("bad coordinate {t:?}")))?;
                }
                verts.push(Point3::from(c));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in it {
                    let first = t.split('/').next().unwrap_or("");
                    let k: i64 = first.parse().map_err(|_| err(ln, format!("bad face index {t:?}")))?;
                    let resolved = if k > 0 {
                        k - 1
                    } else if k < 0 {
                        verts.len() as i64 + k
                    } else {
                        return Err(err(ln, "face index 0".into()));
                    };
                    if resolved < 0 || resolved as usize >= verts.len() {
                        return Err(err(ln, format!("face index {k} out of range")));
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(err(ln, "face with fewer than 3 vertices".into()));
                }
                if idx.len() > 3 && !warned_poly {
                    log::warn!("{}: fan-triangulating non-triangular faces", path.display());
                    warned_poly = true;
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            Some("vt") | Some("vn") if !warned_attr => {
                log::warn!("{}: ignoring texture/normal attributes", path.display());
                warned_attr = true;
            }
            _ => {}
        }
    }
    Ok((verts, faces))
}

pub(super) fn write(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(mesh.vertices.len() * 48 + mesh.triangles.len() * 24);
    for p in &mesh.vertices {
        // `{}` on f64 prints the shortest representation that round-trips.
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t.v[0] + 1, t.v[1] + 1, t.v[2] + 1);
    }
    s
}
