//! Mesh file input/output and the debug JSON dump.

mod debug;
mod obj;
mod stl;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

pub use debug::{dump_debug, DebugDocument, DEBUG_SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Source, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    StlAscii,
    StlBinary,
    Obj,
}

/// A mesh file location plus its on-disk format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeshFile {
    pub format: MeshFormat,
    pub path: PathBuf,
}

impl MeshFile {
    pub fn new(path: impl Into<PathBuf>, format: MeshFormat) -> Self {
        MeshFile { format, path: path.into() }
    }

    /// Format from the extension; `.stl` defaults to binary for writing.
    pub fn from_extension(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let format = match ext_lower(&path).as_deref() {
            Some("obj") => MeshFormat::Obj,
            Some("stl") => MeshFormat::StlBinary,
            other => {
                return Err(Error::Config(format!(
                    "unsupported mesh extension {:?} for {}",
                    other.unwrap_or(""),
                    path.display()
                )))
            }
        };
        Ok(MeshFile { format, path })
    }

    /// Format from the extension, refined by sniffing STL content.
    pub fn detect(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut f = Self::from_extension(path)?;
        if f.format == MeshFormat::StlBinary {
            let bytes = fs::read(&f.path).map_err(|e| Error::Io { path: f.path.clone(), source: e })?;
            f.format = stl::sniff(&bytes);
        }
        Ok(f)
    }
}

fn ext_lower(p: &Path) -> Option<String> {
    p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase())
}

/// Loads a mesh, detecting the format from extension and content.
pub fn load_path(path: impl AsRef<Path>, source: Source) -> Result<TriMesh> {
    let file = MeshFile::detect(path.as_ref())?;
    load_mesh(&file, source)
}

pub fn load_mesh(file: &MeshFile, source: Source) -> Result<TriMesh> {
    let bytes = fs::read(&file.path).map_err(|e| Error::Io { path: file.path.clone(), source: e })?;
    let (points, faces) = match file.format {
        MeshFormat::Obj => {
            let text = String::from_utf8_lossy(&bytes);
            let faces = obj::parse(&text, &file.path)?;
            (faces.0, faces.1)
        }
        MeshFormat::StlAscii | MeshFormat::StlBinary => {
            let soup = match stl::sniff(&bytes) {
                MeshFormat::StlAscii => stl::parse_ascii(&String::from_utf8_lossy(&bytes), &file.path)?,
                _ => stl::parse_binary(&bytes, &file.path)?,
            };
            weld_exact(&soup)
        }
    };
    if faces.is_empty() {
        return Err(Error::EmptyInput(format!("{} contains no triangles", file.path.display())));
    }
    let mesh = TriMesh::new(points, &faces, source);
    mesh.validate()?;
    Ok(mesh)
}

pub fn save_mesh(mesh: &TriMesh, file: &MeshFile) -> Result<()> {
    if !mesh.closed && file.format != MeshFormat::Obj {
        log::warn!("writing an open surface to STL {}", file.path.display());
    }
    let bytes = match file.format {
        MeshFormat::StlBinary => stl::write_binary(mesh),
        MeshFormat::StlAscii => stl::write_ascii(mesh).into_bytes(),
        MeshFormat::Obj => obj::write(mesh).into_bytes(),
    };
    fs::write(&file.path, bytes).map_err(|e| Error::Io { path: file.path.clone(), source: e })
}

/// Saves with the format implied by the path extension.
pub fn save_path(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    save_mesh(mesh, &MeshFile::from_extension(path.as_ref())?)
}

/// Indexes a triangle soup, sharing vertices with bit-identical coordinates.
fn weld_exact(soup: &[[Point3; 3]]) -> (Vec<Point3>, Vec<[usize; 3]>) {
    let key = |p: Point3| {
        // +0.0 and -0.0 are the same position.
        let b = |x: f64| if x == 0.0 { 0u64 } else { x.to_bits() };
        [b(p.x), b(p.y), b(p.z)]
    };
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut points = Vec::new();
    let faces = soup
        .iter()
        .map(|tri| {
            let mut f = [0usize; 3];
            for (k, p) in tri.iter().enumerate() {
                f[k] = *index.entry(key(*p)).or_insert_with(|| {
                    points.push(*p);
                    points.len() - 1
                });
            }
            f
        })
        .collect();
    (points, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn binary_stl_cube_welds_to_eight_vertices() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cube.stl");
        save_path(&shapes::unit_cube_12(), &p).unwrap();
        let m = load_path(&p, Source::A).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.triangles.len(), 12);
        assert!(m.closed);
    }

    #[test]
    fn stl_roundtrip_keeps_coordinates() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.stl");
        let cube = shapes::unit_cube_12();
        save_path(&cube, &p).unwrap();
        let back = load_path(&p, Source::A).unwrap();
        assert_eq!(corner_lists(&back), corner_lists(&cube));
        assert_eq!(back.vertices.len(), cube.vertices.len());
    }

    #[test]
    fn ascii_stl_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.stl");
        let cube = shapes::unit_cube_12();
        save_mesh(&cube, &MeshFile::new(&p, MeshFormat::StlAscii)).unwrap();
        assert_eq!(MeshFile::detect(&p).unwrap().format, MeshFormat::StlAscii);
        let back = load_path(&p, Source::A).unwrap();
        assert_eq!(corner_lists(&back), corner_lists(&cube));
    }

    fn corner_lists(m: &TriMesh) -> Vec<[[f64; 3]; 3]> {
        m.triangles.iter().map(|t| m.corners(t).map(|p| p.to_array())).collect()
    }

    #[test]
    fn obj_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.obj");
        let s = shapes::rotated(&shapes::icosphere(1.3, 1), Point3::new(1., 2., 3.), 0.7);
        save_path(&s, &p).unwrap();
        let back = load_path(&p, Source::B).unwrap();
        assert_eq!(back.vertices, s.vertices);
        assert_eq!(back.faces(), s.faces());
        // load . save . load is a fixed point on topology
        let p2 = dir.path().join("s2.obj");
        save_path(&back, &p2).unwrap();
        assert_eq!(load_path(&p2, Source::B).unwrap().faces(), back.faces());
    }

    #[test]
    fn open_surface_saves_to_stl() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plane.stl");
        save_path(&shapes::plane_grid(1.0, 2, 0.0), &p).unwrap();
        assert!(!load_path(&p, Source::A).unwrap().closed);
    }

    #[test]
    fn empty_ascii_stl_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.stl");
        fs::write(&p, "solid empty\nendsolid empty\n").unwrap();
        assert!(matches!(load_path(&p, Source::A), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let r = save_path(&shapes::unit_cube_12(), "/nonexistent-dir/x/cube.stl");
        assert!(matches!(r, Err(Error::Io { .. })));
    }
}
