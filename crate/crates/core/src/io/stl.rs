use std::path::Path;

use super::MeshFormat;
use crate::error::{Error, Result};
use crate::geometry::{tri_normal, Point3, TriMesh};

const HEADER: &[u8] = b"meshbool binary STL";

pub(super) fn sniff(bytes: &[u8]) -> MeshFormat {
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as u64;
        if 84 + 50 * n == bytes.len() as u64 {
            return MeshFormat::StlBinary;
        }
    }
    let head = String::from_utf8_lossy(&bytes[..bytes.len().min(512)]);
    if head.trim_start().starts_with("solid") {
        MeshFormat::StlAscii
    } else {
        MeshFormat::StlBinary
    }
}

pub(super) fn parse_binary(bytes: &[u8], path: &Path) -> Result<Vec<[Point3; 3]>> {
    let err = |offset: usize, msg: &str| Error::Parse {
        path: path.to_path_buf(),
        location: format!("byte {offset}"),
        msg: msg.to_string(),
    };
    if bytes.len() < 84 {
        return Err(err(bytes.len(), "truncated header"));
    }
    let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    if bytes.len() < 84 + 50 * n {
        return Err(err(bytes.len(), &format!("facet count {n} exceeds file size")));
    }
    let f32_at = |o: usize| f32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]) as f64;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let base = 84 + 50 * i + 12;
        let mut tri = [Point3::ZERO; 3];
        for (k, p) in tri.iter_mut().enumerate() {
            let o = base + 12 * k;
            *p = Point3::new(f32_at(o), f32_at(o + 4), f32_at(o + 8));
            if !p.is_finite() {
                return Err(err(o, "non-finite coordinate"));
            }
        }
        out.push(tri);
    }
    Ok(out)
}

pub(super) fn parse_ascii(text: &str, path: &Path) -> Result<Vec<[Point3; 3]>> {
    let mut out = Vec::new();
    let mut pending: Vec<Point3> = Vec::with_capacity(3);
    let mut tokens = text
        .lines()
        .enumerate()
        .flat_map(|(ln, line)| line.split_whitespace().map(move |t| (ln + 1, t)));
    let err = |ln: usize, msg: String| Error::Parse { path: path.to_path_buf(), location: format!("line {ln}"), msg };
    while let Some((ln, tok)) = tokens.next() {
        match tok {
            "vertex" => {
                let mut c = [0.0f64; 3];
                for slot in &mut c {
                    let (l, t) = tokens.next().ok_or_else(|| err(ln, "unexpected end of file in vertex".into()))?;
                    *slot = t.parse::<f64>().map_err(|_| err(l, format!("bad coordinate {t:?}")))?;
                    if !slot.is_finite() {
                        return Err(err(l, format!("non-finite coordinate {t:?}")));
                    }
                }
                pending.push(Point3::from(c));
            }
            "endloop" => {
                if pending.len() != 3 {
                    return Err(err(ln, format!("facet with {} vertices", pending.len())));
                }
                out.push([pending[0], pending[1], pending[2]]);
                pending.clear();
            }
            _ => {}
        }
    }
    if !pending.is_empty() {
        return Err(err(0, "unterminated facet".into()));
    }
    Ok(out)
}

fn unit_normal(m: &TriMesh, t: &crate::geometry::Triangle) -> Point3 {
    let [a, b, c] = m.corners(t);
    tri_normal(a, b, c).normalized()
}

pub(super) fn write_binary(mesh: &TriMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.triangles.len());
    let mut header = [0u8; 80];
    header[..HEADER.len()].copy_from_slice(HEADER);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in &mesh.triangles {
        let n = unit_normal(mesh, t);
        for p in std::iter::once(n).chain(t.v.iter().map(|&i| mesh.vertices[i])) {
            for c in [p.x, p.y, p.z] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

pub(super) fn write_ascii(mesh: &TriMesh) -> String {
    use std::fmt::Write;
    let mut s = String::from("solid meshbool\n");
    for t in &mesh.triangles {
        let n = unit_normal(mesh, t);
        let _ = writeln!(s, "  facet normal {:e} {:e} {:e}", n.x as f32, n.y as f32, n.z as f32);
        s.push_str("    outer loop\n");
        for &i in &t.v {
            let p = mesh.vertices[i];
            let _ = writeln!(s, "      vertex {:e} {:e} {:e}", p.x as f32, p.y as f32, p.z as f32);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    s.push_str("endsolid meshbool\n");
    s
}
