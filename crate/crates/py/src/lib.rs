//! Python bindings for the mesh Boolean pipeline.

use meshbool::blocks::BooleanResult;
use meshbool::error::Error;
use meshbool::fixtures;
use meshbool::geometry::{is_closed_manifold, signed_volume_unchecked, Point3, Source, TriMesh};
use meshbool::io::{load_path, save_path};
use meshbool::octree::OctreeConfig;
use meshbool::pipeline::{run_boolean, run_pipeline, Config, Stage};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(meshbool_py, MeshboolError, PyException);

fn to_py(e: Error) -> PyErr {
    MeshboolError::new_err(format!("[exit {}] {e}", e.exit_code()))
}

/// Triangle mesh with outward (counter-clockwise) winding.
#[pyclass(name = "Mesh", module = "meshbool_py")]
pub struct PyMesh {
    inner: TriMesh,
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> PyResult<Self> {
        let verts: Vec<Point3> = vertices.into_iter().map(Point3::from).collect();
        let m = TriMesh::new(verts, &faces, Source::A);
        m.validate().map_err(to_py)?;
        Ok(PyMesh { inner: m })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyMesh { inner: load_path(path, Source::A).map_err(to_py)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_path(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn vertices(&self) -> Vec<[f64; 3]> {
        self.inner.vertices.iter().map(|p| p.to_array()).collect()
    }

    #[getter]
    fn faces(&self) -> Vec<[usize; 3]> {
        self.inner.faces()
    }

    #[getter]
    fn closed(&self) -> bool {
        self.inner.closed
    }

    /// Signed volume by the divergence theorem.
    fn volume(&self) -> f64 {
        signed_volume_unchecked(&self.inner.vertices, &self.inner.triangles)
    }

    fn is_manifold(&self) -> bool {
        is_closed_manifold(&self.inner.triangles)
    }

    fn translated(&self, dx: f64, dy: f64, dz: f64) -> Self {
        PyMesh { inner: self.inner.translated(Point3::new(dx, dy, dz)) }
    }

    fn __len__(&self) -> usize {
        self.inner.triangles.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(vertices={}, triangles={}, closed={})",
            self.inner.vertices.len(),
            self.inner.triangles.len(),
            self.inner.closed
        )
    }
}

fn wrap(ms: &[TriMesh]) -> Vec<PyMesh> {
    ms.iter().cloned().map(|inner| PyMesh { inner }).collect()
}

/// The four Boolean results, each a list of closed meshes.
#[pyclass(name = "BooleanResult", module = "meshbool_py")]
pub struct PyBooleanResult {
    inner: BooleanResult,
}

#[pymethods]
impl PyBooleanResult {
    #[getter]
    fn union(&self) -> Vec<PyMesh> {
        wrap(&self.inner.union)
    }

    #[getter]
    fn intersection(&self) -> Vec<PyMesh> {
        wrap(&self.inner.intersection)
    }

    #[getter]
    fn a_minus_b(&self) -> Vec<PyMesh> {
        wrap(&self.inner.a_minus_b)
    }

    #[getter]
    fn b_minus_a(&self) -> Vec<PyMesh> {
        wrap(&self.inner.b_minus_a)
    }

    fn __repr__(&self) -> String {
        let r = &self.inner;
        format!(
            "BooleanResult(union={}, intersection={}, a_minus_b={}, b_minus_a={})",
            r.union.len(),
            r.intersection.len(),
            r.a_minus_b.len(),
            r.b_minus_a.len()
        )
    }
}

pub fn make_config(
    merge_tol: Option<f64>,
    octree_depth: usize,
    octree_capacity: usize,
    threads: usize,
    strict: bool,
) -> Result<Config, Error> {
    let octree = OctreeConfig { max_depth: octree_depth, leaf_capacity: octree_capacity };
    octree.validate()?;
    Ok(Config { merge_tol, octree, threads, strict })
}

/// Union, intersection and both subtractions of two closed meshes.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (a, b, merge_tol=None, octree_depth=8, octree_capacity=32, threads=0, strict=false))]
fn boolean(
    py: Python<'_>,
    a: &PyMesh,
    b: &PyMesh,
    merge_tol: Option<f64>,
    octree_depth: usize,
    octree_capacity: usize,
    threads: usize,
    strict: bool,
) -> PyResult<PyBooleanResult> {
    let cfg = make_config(merge_tol, octree_depth, octree_capacity, threads, strict).map_err(to_py)?;
    let (a, b) = (a.inner.clone(), b.inner.clone());
    let (r, _) = py.detach(|| run_boolean(&a, &b, &cfg)).map_err(to_py)?;
    Ok(PyBooleanResult { inner: r })
}

/// Sub-surfaces of each input after cutting along the intersection loops.
#[pyfunction]
#[pyo3(signature = (a, b, merge_tol=None, threads=0))]
fn split_surfaces(
    py: Python<'_>,
    a: &PyMesh,
    b: &PyMesh,
    merge_tol: Option<f64>,
    threads: usize,
) -> PyResult<(Vec<PyMesh>, Vec<PyMesh>)> {
    let cfg = Config { merge_tol, threads, ..Config::default() };
    let (a, b) = (a.inner.clone(), b.inner.clone());
    let st = py.detach(|| run_pipeline(&a, &b, &cfg, Stage::SubSurfaces)).map_err(to_py)?;
    Ok((wrap(&st.subsurface_meshes(Source::A)), wrap(&st.subsurface_meshes(Source::B))))
}

/// Intersection loops as `(kind, vertex_count)` pairs.
#[pyfunction]
fn intersection_loops(py: Python<'_>, a: &PyMesh, b: &PyMesh) -> PyResult<Vec<(String, usize)>> {
    let (a, b) = (a.inner.clone(), b.inner.clone());
    let st = py.detach(|| run_pipeline(&a, &b, &Config::default(), Stage::Loops)).map_err(to_py)?;
    Ok(st
        .loops
        .iter()
        .map(|l| {
            let kind = serde_json::to_value(l.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            (kind, l.verts.len())
        })
        .collect())
}

/// A named test configuration: cube_cube, cube_sphere, crossed_cylinders,
/// tori, blob_plane or vee_wee.
#[pyfunction]
fn fixture(name: &str) -> PyResult<(PyMesh, PyMesh)> {
    let (a, b) = match name {
        "cube_cube" => fixtures::cube_cube(),
        "cube_sphere" => fixtures::cube_sphere(),
        "crossed_cylinders" => fixtures::crossed_cylinders(),
        "tori" => fixtures::tori(),
        "blob_plane" => fixtures::blob_plane(),
        "vee_wee" => fixtures::vee_wee(),
        _ => return Err(MeshboolError::new_err(format!("unknown fixture '{name}'"))),
    };
    Ok((PyMesh { inner: a }, PyMesh { inner: b }))
}

#[pymodule]
fn meshbool_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MeshboolError", m.py().get_type::<MeshboolError>())?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PyBooleanResult>()?;
    m.add_function(wrap_pyfunction!(boolean, m)?)?;
    m.add_function(wrap_pyfunction!(split_surfaces, m)?)?;
    m.add_function(wrap_pyfunction!(intersection_loops, m)?)?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    Ok(())
}
