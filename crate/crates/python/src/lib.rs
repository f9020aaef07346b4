//! Python bindings: index sets, the Dantzig solver, images, moments and the
//! classification sweep.

use std::sync::Arc;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use sparsegfs::collocation::CollocationSystem;
use sparsegfs::dantzig::{self, SolverConfig};
use sparsegfs::experiments::{
    experiment1_config, run_experiment1_with, Classifier, Dataset, ErrorConvention, Experiment2,
    NoiseKind,
};
use sparsegfs::indexsets::{build, Shape};
use sparsegfs::moments::{self as mom, MomentVector};
use sparsegfs::series::TestFunction;
use sparsegfs::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NumericalBreakdown { .. } | Error::Infeasible | Error::DegenerateColumn { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_shape(s: &str) -> PyResult<Shape> {
    s.parse().map_err(to_py)
}

fn parse_function(s: &str) -> PyResult<TestFunction> {
    match s {
        "f1" => Ok(TestFunction::F1),
        "f2" => Ok(TestFunction::F2),
        "f3" => Ok(TestFunction::F3),
        _ => Err(PyValueError::new_err(format!("unknown function {s:?}"))),
    }
}

fn parse_noise(s: &str) -> PyResult<NoiseKind> {
    s.parse().map_err(to_py)
}

fn config(delta: f64, tol: f64, max_iters: usize, polish: bool) -> SolverConfig {
    SolverConfig {
        delta,
        tol,
        max_iters,
        polish,
        ..SolverConfig::default()
    }
}

/// Multi-indices of an index set, in lexicographic order.
#[pyfunction]
#[pyo3(signature = (shape, n, d=2))]
fn indexset(shape: &str, n: usize, d: usize) -> PyResult<Vec<Vec<usize>>> {
    let set = build(parse_shape(shape)?, n, d).map_err(to_py)?;
    Ok(set.iter().map(|m| m.0.clone()).collect())
}

#[pyfunction]
fn hermite_zeros(m: usize) -> PyResult<Vec<f64>> {
    sparsegfs::basis::hermite_zeros(m).map_err(to_py)
}

/// `(nodes, weights)` of the m-point Gauss-Hermite rule.
#[pyfunction]
fn gauss_hermite(m: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    sparsegfs::quadrature::gauss_hermite(m).map_err(to_py)
}

#[pyclass(name = "SolveResult", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySolveResult {
    #[pyo3(get)]
    coefficients: Vec<f64>,
    #[pyo3(get)]
    residual_inf: f64,
    #[pyo3(get)]
    l1_norm: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    certified: bool,
}

impl From<dantzig::SolveResult> for PySolveResult {
    fn from(r: dantzig::SolveResult) -> Self {
        PySolveResult {
            coefficients: r.coefficients,
            residual_inf: r.residual_inf,
            l1_norm: r.l1_norm,
            iterations: r.iterations,
            converged: r.converged,
            certified: r.certified,
        }
    }
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(p={}, l1_norm={:e}, residual_inf={:e}, iterations={}, converged={}, certified={})",
            self.coefficients.len(),
            self.l1_norm,
            self.residual_inf,
            self.iterations,
            self.converged,
            self.certified
        )
    }
}

/// Solves `min |c|_1` s.t. `|D X^T (f - X c)|_inf <= delta` for a dense,
/// row-major `x` of shape `(len(f), p)`.
#[pyfunction]
#[pyo3(signature = (x, f, delta=1e-8, tol=1e-9, max_iters=200_000, polish=true))]
fn dantzig_solve(
    py: Python<'_>,
    x: Vec<Vec<f64>>,
    f: Vec<f64>,
    delta: f64,
    tol: f64,
    max_iters: usize,
    polish: bool,
) -> PyResult<PySolveResult> {
    let m = x.len();
    let p = x.first().map_or(0, Vec::len);
    if x.iter().any(|row| row.len() != p) {
        return Err(PyValueError::new_err("x rows have different lengths"));
    }
    let flat: Vec<f64> = x.into_iter().flatten().collect();
    let cfg = config(delta, tol, max_iters, polish);
    py.detach(|| {
        let sys = CollocationSystem::from_dense(m, p, flat, f)?;
        dantzig::solve(&sys, &cfg)
    })
    .map(Into::into)
    .map_err(to_py)
}

#[pyclass(name = "Approximation", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyApproximation {
    #[pyo3(get)]
    l2_error: f64,
    #[pyo3(get)]
    support_match: bool,
    #[pyo3(get)]
    indices: Vec<Vec<usize>>,
    #[pyo3(get)]
    result: PySolveResult,
}

/// Recovers a test function's Hermite coefficients on `M x M` zeros and
/// compares them with the reference expansion.
#[pyfunction]
#[pyo3(signature = (function, shape, n, m, delta=None))]
fn approximate(
    py: Python<'_>,
    function: &str,
    shape: &str,
    n: usize,
    m: usize,
    delta: Option<f64>,
) -> PyResult<PyApproximation> {
    let function = parse_function(function)?;
    let shape = parse_shape(shape)?;
    let mut cfg = experiment1_config();
    if let Some(d) = delta {
        cfg.delta = d;
    }
    let run = py
        .detach(|| run_experiment1_with(function, shape, n, m, &cfg, ErrorConvention::default()))
        .map_err(to_py)?;
    let indices = build(shape, n, 2)
        .map_err(to_py)?
        .iter()
        .map(|k| k.0.clone())
        .collect();
    Ok(PyApproximation {
        l2_error: run.error.l2,
        support_match: run.error.support_match,
        indices,
        result: run.solve.into(),
    })
}

#[pyclass(name = "Image", frozen, from_py_object)]
#[derive(Clone)]
struct PyImage {
    inner: sparsegfs::image::Image,
}

#[pymethods]
impl PyImage {
    /// Square image from row-major intensities in [0, 1].
    #[new]
    fn new(size: usize, pixels: Vec<f64>) -> PyResult<Self> {
        Ok(PyImage {
            inner: sparsegfs::image::Image::new(size, pixels).map_err(to_py)?,
        })
    }

    /// Built-in 50x50 glyph, `label` in 1..=7.
    #[staticmethod]
    fn glyph(label: usize) -> PyResult<Self> {
        sparsegfs::glyphs::glyph(label)
            .map(|inner| PyImage { inner })
            .ok_or_else(|| PyValueError::new_err(format!("no glyph {label}")))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyImage {
            inner: sparsegfs::image::Image::load(path).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn pixels(&self) -> Vec<f64> {
        self.inner.pixels().to_vec()
    }

    /// Counterclockwise rotation by `theta` radians about the image centre,
    /// in the coordinates the moments are computed in.
    fn rotate(&self, theta: f64) -> Self {
        PyImage {
            inner: self.inner.rotate_mapped(theta),
        }
    }

    fn __repr__(&self) -> String {
        format!("Image(size={})", self.inner.size())
    }
}

/// Image to moments and invariants; the collocation operator is built once
/// per image size.
#[pyclass(name = "Pipeline", frozen)]
struct PyPipeline {
    inner: Arc<sparsegfs::experiments::Pipeline>,
}

#[pymethods]
impl PyPipeline {
    #[new]
    #[pyo3(signature = (image_size=50, shape="T", n=20, delta=1e-8))]
    fn new(py: Python<'_>, image_size: usize, shape: &str, n: usize, delta: f64) -> PyResult<Self> {
        let shape = parse_shape(shape)?;
        let cfg = SolverConfig {
            delta,
            ..SolverConfig::default()
        };
        let inner = py
            .detach(|| sparsegfs::experiments::Pipeline::new(shape, n, image_size, cfg))
            .map_err(to_py)?;
        Ok(PyPipeline {
            inner: Arc::new(inner),
        })
    }

    /// `[m20, m11, m02, m30, m21, m12, m03, m40, m31, m22, m13, m04]`.
    fn moments(&self, py: Python<'_>, image: &PyImage) -> PyResult<Vec<f64>> {
        let m = py
            .detach(|| self.inner.moments(&image.inner))
            .map_err(to_py)?;
        Ok(m.as_array().to_vec())
    }

    /// The eleven rotation invariants of the Hermite-scaled moments.
    fn invariants(&self, py: Python<'_>, image: &PyImage) -> PyResult<Vec<f64>> {
        let phi = py
            .detach(|| self.inner.invariants(&image.inner))
            .map_err(to_py)?;
        Ok(phi.phi.to_vec())
    }
}

fn moment_vector(values: Vec<f64>) -> PyResult<MomentVector> {
    let arr: [f64; 12] = values.try_into().map_err(|v: Vec<f64>| {
        PyValueError::new_err(format!("expected 12 moments, got {}", v.len()))
    })?;
    Ok(MomentVector::from_array(arr))
}

/// Invariants of a 12-entry moment vector as returned by
/// `Pipeline.moments`. With `hermite_scaled=False` the formulas are applied to
/// the values as given.
#[pyfunction]
#[pyo3(signature = (moments, hermite_scaled=true))]
fn invariants(moments: Vec<f64>, hermite_scaled: bool) -> PyResult<Vec<f64>> {
    let m = moment_vector(moments)?;
    let phi = if hermite_scaled {
        mom::hermite_invariants(&m)
    } else {
        mom::invariants(&m)
    };
    Ok(phi.phi.to_vec())
}

/// Moment vector of the rotated function, from the exact linear action of
/// the rotation on each order.
#[pyfunction]
fn rotate_moments(moments: Vec<f64>, theta: f64) -> PyResult<Vec<f64>> {
    Ok(mom::rotate_moment_model(&moment_vector(moments)?, theta)
        .map_err(to_py)?
        .as_array()
        .to_vec())
}

/// `(label, category)` of the nearest built-in glyph to `image`.
#[pyfunction]
fn classify_glyph(
    py: Python<'_>,
    image: &PyImage,
    pipeline: &PyPipeline,
) -> PyResult<(usize, usize)> {
    let pipe = Arc::clone(&pipeline.inner);
    py.detach(|| {
        let classifier = Classifier::new(&Dataset::stand_in(), &pipe)?;
        Ok(classifier.nearest(&pipe.invariants(&image.inner)?))
    })
    .map_err(to_py)
}

/// Identification and categorization ratios over rotated, noisy copies of
/// the training set, one dict per noise level.
#[pyfunction]
#[pyo3(signature = (noise="gauss", sigmas=None, trials=50, seed=42, train_dir=None))]
fn run_classification<'py>(
    py: Python<'py>,
    noise: &str,
    sigmas: Option<Vec<f64>>,
    trials: usize,
    seed: u64,
    train_dir: Option<String>,
) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
    let kind = parse_noise(noise)?;
    let sigmas = sigmas.unwrap_or_else(sparsegfs::experiments::default_sigmas);
    let reports = py
        .detach(|| {
            let training = match &train_dir {
                Some(d) => Dataset::load_dir(d)?,
                None => Dataset::stand_in(),
            };
            Experiment2::with_training(training)?.run(kind, &sigmas, trials, seed)
        })
        .map_err(to_py)?;
    reports
        .into_iter()
        .map(|r| {
            let d = pyo3::types::PyDict::new(py);
            d.set_item("sigma", r.sigma)?;
            d.set_item("kind", r.kind.name())?;
            d.set_item("identified", r.identified_ratio)?;
            d.set_item("categorized", r.categorized_ratio)?;
            d.set_item("confusion", r.confusion)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn pysparsegfs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(indexset, m)?)?;
    m.add_function(wrap_pyfunction!(hermite_zeros, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_hermite, m)?)?;
    m.add_function(wrap_pyfunction!(dantzig_solve, m)?)?;
    m.add_function(wrap_pyfunction!(approximate, m)?)?;
    m.add_function(wrap_pyfunction!(invariants, m)?)?;
    m.add_function(wrap_pyfunction!(rotate_moments, m)?)?;
    m.add_function(wrap_pyfunction!(classify_glyph, m)?)?;
    m.add_function(wrap_pyfunction!(run_classification, m)?)?;
    m.add_class::<PySolveResult>()?;
    m.add_class::<PyApproximation>()?;
    m.add_class::<PyImage>()?;
    m.add_class::<PyPipeline>()?;
    m.add("INVARIANT_COUNT", mom::INVARIANT_COUNT)?;
    Ok(())
}
