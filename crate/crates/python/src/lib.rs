//! Python bindings: network specs and evaluation, datasets, the training
//! entry points and the NSGA-II / GA / GWO building blocks.

use std::sync::Mutex;

use gmw_core::data::{self, Dataset};
use gmw_core::experiment::{self, RunConfig};
use gmw_core::metaheuristics;
use gmw_core::moo::{self, ObjectiveVector};
use gmw_core::nn::{self, Batch, Network, NetworkSpec};
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

pyo3::create_exception!(gmwsgd, GmwError, PyException);

fn err(e: gmw_core::Error) -> PyErr {
    GmwError::new_err(format!("[{}] {e}", e.category()))
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "NetworkSpec", module = "gmwsgd", from_py_object)]
#[derive(Clone)]
struct PyNetworkSpec {
    inner: NetworkSpec,
}

impl PyNetworkSpec {
    fn network(&self, params: &[f64]) -> PyResult<Network> {
        let mut net = Network::zeros(self.inner.clone()).map_err(err)?;
        net.load(params).map_err(err)?;
        Ok(net)
    }
}

#[pymethods]
impl PyNetworkSpec {
    /// Dense ReLU network with the given layer widths (input first).
    #[staticmethod]
    fn mlp(widths: Vec<usize>) -> PyResult<Self> {
        let inner = NetworkSpec::mlp(&widths);
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn default_cnn() -> Self {
        Self {
            inner: NetworkSpec::default_cnn(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: NetworkSpec =
            serde_json::from_str(text).map_err(|e| GmwError::new_err(format!("bad network spec: {e}")))?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("spec serializes")
    }

    fn param_count(&self) -> PyResult<usize> {
        self.inner.param_count().map_err(err)
    }

    fn input_len(&self) -> usize {
        self.inner.input_len()
    }

    /// Logits, one row per sample of the flat `inputs`.
    fn forward(&self, params: Vec<f64>, inputs: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let net = self.network(&params)?;
        let n = inputs.len() / self.inner.input_len().max(1);
        let labels = vec![0; n];
        let logits = net
            .forward(&Batch::new(&inputs, &labels, self.inner.input_shape).map_err(err)?)
            .map_err(err)?;
        Ok((0..logits.rows).map(|r| logits.row(r).to_vec()).collect())
    }

    /// `(mean cross-entropy, accuracy)`.
    fn evaluate(&self, params: Vec<f64>, inputs: Vec<f64>, labels: Vec<usize>) -> PyResult<(f64, f64)> {
        let net = self.network(&params)?;
        nn::evaluate_chunked(&net, &inputs, &labels, self.inner.input_shape, 256).map_err(err)
    }

    /// `(loss, flat gradient)` by backpropagation.
    fn gradient(&self, params: Vec<f64>, inputs: Vec<f64>, labels: Vec<usize>) -> PyResult<(f64, Vec<f64>)> {
        let net = self.network(&params)?;
        let batch = Batch::new(&inputs, &labels, self.inner.input_shape).map_err(err)?;
        let (loss, grads) = net.backward(&batch).map_err(err)?;
        Ok((loss, grads.flatten().into_inner()))
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkSpec(input={:?}, layers={}, params={})",
            self.inner.input_shape,
            self.inner.layers.len(),
            self.inner.param_count().map_or(0, |p| p)
        )
    }
}

#[pyclass(name = "Dataset", module = "gmwsgd", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(inputs: Vec<f64>, labels: Vec<usize>, sample_shape: [usize; 3], class_count: usize) -> PyResult<Self> {
        let inner = Dataset::new("python", inputs, labels, sample_shape, class_count).map_err(err)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn inputs(&self) -> Vec<f64> {
        self.inner.inputs.clone()
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels.clone()
    }

    #[getter]
    fn sample_shape(&self) -> [usize; 3] {
        self.inner.sample_shape
    }

    #[getter]
    fn class_count(&self) -> usize {
        self.inner.class_count
    }

    /// Stratified `(first, rest)` split with `fraction` in the first part.
    fn split(&self, fraction: f64, seed: u64) -> PyResult<(Self, Self)> {
        let (a, b) = data::split(&self.inner, fraction, seed).map_err(err)?;
        Ok((Self { inner: a }, Self { inner: b }))
    }

    fn select_classes(&self, classes: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.select_classes(&classes).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(name={:?}, samples={}, shape={:?}, classes={})",
            self.inner.name,
            self.inner.len(),
            self.inner.sample_shape,
            self.inner.class_count
        )
    }
}

#[pyfunction]
fn make_blobs(n: usize, classes: usize, dims: usize, spread: f64, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset {
        inner: data::make_blobs(n, classes, dims, spread, seed).map_err(err)?,
    })
}

#[pyfunction]
fn load_cifar10(path: std::path::PathBuf) -> PyResult<(PyDataset, PyDataset)> {
    let (train, test) = data::load_cifar10(&path).map_err(err)?;
    Ok((PyDataset { inner: train }, PyDataset { inner: test }))
}

/// Default run configuration as TOML.
#[pyfunction]
fn default_config() -> String {
    toml::to_string(&RunConfig::default()).expect("config serializes")
}

fn parse_config(config: &str, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::parse(config).map_err(err)?;
    if let Some(o) = overrides {
        // merge via JSON so every config field is reachable
        let mut value = serde_json::to_value(&cfg).expect("config serializes");
        let py = o.py();
        let text: String = py.import("json")?.call_method1("dumps", (o,))?.extract()?;
        let patch: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| GmwError::new_err(format!("bad overrides: {e}")))?;
        merge(&mut value, patch);
        cfg = serde_json::from_value(value).map_err(|e| GmwError::new_err(format!("[config] {e}")))?;
    }
    Ok(cfg)
}

fn merge(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

/// Run a configuration (TOML or JSON text, `""` for defaults) and return
/// the result document as a dict. `overrides` is merged into the config.
#[pyfunction]
#[pyo3(signature = (config = "", overrides = None, train = None, test = None))]
fn run<'py>(
    py: Python<'py>,
    config: &str,
    overrides: Option<&Bound<'py, PyDict>>,
    train: Option<PyDataset>,
    test: Option<PyDataset>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = parse_config(config, overrides)?;
    let result = py
        .detach(|| match (&train, &test) {
            (Some(a), Some(b)) => experiment::run_on(&cfg, &a.inner, &b.inner),
            (None, None) => experiment::run(&cfg),
            _ => Err(gmw_core::Error::usage("pass both train and test datasets, or neither")),
        })
        .map_err(err)?;
    let text = serde_json::to_string(&result).expect("result serializes");
    json_to_py(py, &text)
}

/// Trace CSV for a result document (dict or JSON text).
#[pyfunction]
fn trace_csv(py: Python<'_>, result: &Bound<'_, PyAny>) -> PyResult<String> {
    let text: String = if let Ok(s) = result.extract::<String>() {
        s
    } else {
        py.import("json")?.call_method1("dumps", (result,))?.extract()?
    };
    let parsed: experiment::RunResult =
        serde_json::from_str(&text).map_err(|e| GmwError::new_err(format!("not a run result: {e}")))?;
    experiment::trace_export(&parsed).map_err(err)
}

fn objectives(points: &[(f64, f64)]) -> Vec<ObjectiveVector> {
    points.iter().map(|&(a, b)| ObjectiveVector::new(a, b)).collect()
}

#[pyfunction]
fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    moo::dominates(&ObjectiveVector::new(a.0, a.1), &ObjectiveVector::new(b.0, b.1))
}

/// Fronts of minimization pairs, best first.
#[pyfunction]
fn nondominated_sort(points: Vec<(f64, f64)>) -> Vec<Vec<usize>> {
    moo::fast_nondominated_sort(&objectives(&points))
}

#[pyfunction]
fn crowding_distance(front: Vec<(f64, f64)>) -> Vec<f64> {
    moo::crowding_distance(&objectives(&front))
}

#[pyfunction]
fn select_survivors(points: Vec<(f64, f64)>, n: usize) -> PyResult<Vec<usize>> {
    moo::select_survivors(&objectives(&points), n).map_err(err)
}

/// Polynomial mutation of one gene with uniform draw `u`.
#[pyfunction]
fn mutate_gene(p: f64, u: f64, eta_m: f64, lower: f64, upper: f64) -> f64 {
    metaheuristics::mutate_gene(p, u, eta_m, lower, upper)
}

/// Plain GWO on a Python objective `f(list[float]) -> float`.
/// Returns `(best_position, best_fitness, history)`.
#[pyfunction]
#[pyo3(signature = (objective, dim, bounds, pack_size = 30, iterations = 500, a_range = (2.0, 0.0), seed = 0))]
#[allow(clippy::type_complexity, clippy::too_many_arguments)]
fn gwo_minimize(
    py: Python<'_>,
    objective: Py<PyAny>,
    dim: usize,
    bounds: (f64, f64),
    pack_size: usize,
    iterations: usize,
    a_range: (f64, f64),
    seed: u64,
) -> PyResult<(Vec<f64>, f64, Vec<f64>)> {
    let failure: Mutex<Option<PyErr>> = Mutex::new(None);
    let f = |x: &[f64]| {
        Python::attach(|py| match objective.call1(py, (x.to_vec(),)).and_then(|v| v.extract::<f64>(py)) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                f64::INFINITY
            }
        })
    };
    let out = py.detach(|| metaheuristics::gwo_minimize(f, dim, bounds, pack_size, iterations, a_range, seed));
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let out = out.map_err(err)?;
    Ok((out.best_position, out.best_fitness, out.history))
}

#[pymodule]
fn gmwsgd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GmwError", m.py().get_type::<GmwError>())?;
    m.add_class::<PyNetworkSpec>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(make_blobs, m)?)?;
    m.add_function(wrap_pyfunction!(load_cifar10, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(trace_csv, m)?)?;
    m.add_function(wrap_pyfunction!(dominates, m)?)?;
    m.add_function(wrap_pyfunction!(nondominated_sort, m)?)?;
    m.add_function(wrap_pyfunction!(crowding_distance, m)?)?;
    m.add_function(wrap_pyfunction!(select_survivors, m)?)?;
    m.add_function(wrap_pyfunction!(mutate_gene, m)?)?;
    m.add_function(wrap_pyfunction!(gwo_minimize, m)?)?;
    Ok(())
}
