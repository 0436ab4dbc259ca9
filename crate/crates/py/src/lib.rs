//! Python bindings. Matrices cross the boundary as nested lists, missing
//! values as `None`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use corrtree::correlation::pearson_matrix;
use corrtree::dynamics;
use corrtree::error::Error;
use corrtree::export::{export_dot, export_graphml, export_newick};
use corrtree::ingest::{load_panel, LoadOptions, Timestamp};
use corrtree::metric::{check_metric_axioms, rho_to_distance as rho_to_d, to_distance};
use corrtree::mst::{build_mst_traced, is_connected_subtree};
use corrtree::pipeline::{tree_json, ExportFormat, PipelineConfig, Rebase};
use corrtree::synthgen::FactorModelSpec;
use corrtree::transform::{apply, rebase};
use corrtree::ultrametric::{dendrogram_from_tree, subdominant_ultrametric};
use corrtree::{SignalKind, WindowSpec};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(pycorrtree, CorrtreeError, PyValueError, "Raised for invalid data or configuration.");

fn err(e: Error) -> PyErr {
    CorrtreeError::new_err(e.to_string())
}

fn kind(name: &str) -> PyResult<SignalKind> {
    name.parse().map_err(err)
}

fn nan_to_none(v: f64) -> Option<f64> {
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

type Step = (String, String, f64, bool);
type Window = (usize, usize);

#[derive(IntoPyObject)]
enum Stamp {
    Int(i64),
    Str(String),
}

/// Raw signal panel: one row per timestamp, one column per asset.
#[pyclass(module = "pycorrtree", skip_from_py_object)]
#[derive(Clone)]
pub struct Panel(corrtree::TimeSeriesPanel);

#[pymethods]
impl Panel {
    #[new]
    fn new(assets: Vec<String>, rows: Vec<Vec<Option<f64>>>) -> PyResult<Self> {
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect();
        corrtree::TimeSeriesPanel::from_rows(assets, &rows).map(Panel).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (path, delimiter = ",", time_column = true, missing = None))]
    fn load(path: PathBuf, delimiter: &str, time_column: bool, missing: Option<Vec<String>>) -> PyResult<Self> {
        let &[delimiter] = delimiter.as_bytes() else {
            return Err(PyValueError::new_err("delimiter must be a single byte"));
        };
        let mut opts = LoadOptions {
            delimiter,
            time_column,
            ..LoadOptions::default()
        };
        if let Some(m) = missing {
            opts.missing_markers = m;
        }
        load_panel(path, &opts).map(Panel).map_err(err)
    }

    #[getter]
    fn assets(&self) -> Vec<String> {
        self.0.assets().to_vec()
    }

    #[getter]
    fn timestamps(&self) -> Vec<Stamp> {
        self.0
            .timestamps()
            .iter()
            .map(|t| match t {
                Timestamp::Index(i) => Stamp::Int(*i),
                Timestamp::Key(k) => Stamp::Str(k.clone()),
            })
            .collect()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.n_times(), self.0.n_assets())
    }

    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.0.n_times())
            .map(|t| self.0.row(t).iter().copied().map(nan_to_none).collect())
            .collect()
    }

    /// Quote every series in units of `base`; the old unit becomes `numeraire`.
    fn rebase(&self, base: &str, numeraire: &str) -> PyResult<Self> {
        rebase(&self.0, base, numeraire).map(Panel).map_err(err)
    }

    /// Signal transform: "log-return", "raw", "rank" or "zscore".
    #[pyo3(signature = (signal = "log-return"))]
    fn transform(&self, signal: &str) -> PyResult<Returns> {
        apply(&self.0, kind(signal)?).map(Returns).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Panel({} times x {} assets)", self.0.n_times(), self.0.n_assets())
    }
}

/// Transformed observations, ready for correlation.
#[pyclass(module = "pycorrtree", skip_from_py_object)]
#[derive(Clone)]
pub struct Returns(corrtree::ReturnsMatrix);

#[pymethods]
impl Returns {
    #[staticmethod]
    #[pyo3(signature = (assets, columns, kind = "raw"))]
    fn from_columns(assets: Vec<String>, columns: Vec<Vec<Option<f64>>>, kind: &str) -> PyResult<Self> {
        let cols: Vec<Vec<f64>> = columns
            .into_iter()
            .map(|c| c.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect();
        corrtree::ReturnsMatrix::from_columns(assets, &cols, self::kind(kind)?)
            .map(Returns)
            .map_err(err)
    }

    #[getter]
    fn assets(&self) -> Vec<String> {
        self.0.assets().to_vec()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.n_obs(), self.0.n_assets())
    }

    fn columns(&self) -> Vec<Vec<Option<f64>>> {
        self.0
            .columns()
            .into_iter()
            .map(|c| c.into_iter().map(nan_to_none).collect())
            .collect()
    }

    /// Observations `start..end`.
    fn slice(&self, start: usize, end: usize) -> PyResult<Self> {
        self.0.slice_rows(start, end).map(Returns).map_err(err)
    }

    #[pyo3(signature = (min_overlap = corrtree::DEFAULT_MIN_OVERLAP))]
    fn correlation(&self, min_overlap: usize) -> PyResult<CorrelationMatrix> {
        pearson(self, min_overlap)
    }

    fn __repr__(&self) -> String {
        format!("Returns({}, {} obs x {} assets)", self.0.kind(), self.0.n_obs(), self.0.n_assets())
    }
}

#[pyclass(module = "pycorrtree", skip_from_py_object)]
#[derive(Clone)]
pub struct CorrelationMatrix(corrtree::CorrelationMatrix);

#[pymethods]
impl CorrelationMatrix {
    #[new]
    fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        corrtree::CorrelationMatrix::from_rows(labels, &rows)
            .map(CorrelationMatrix)
            .map_err(err)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    fn get(&self, a: &str, b: &str) -> PyResult<f64> {
        let (i, j) = lookup(self.0.matrix(), a, b)?;
        Ok(self.0.get(i, j))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        self.0.matrix().to_rows()
    }

    fn to_csv(&self) -> String {
        self.0.matrix().to_csv_string()
    }

    /// Counts of strong (>= 0.5), weak (>= 0) and negative pairs.
    fn census(&self) -> BTreeMap<&'static str, usize> {
        let c = self.0.census();
        BTreeMap::from([("n", c.n_assets), ("strong", c.strong), ("weak", c.weak), ("negative", c.negative)])
    }

    fn distance(&self) -> PyResult<DistanceMatrix> {
        to_distance(&self.0).map(DistanceMatrix).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(module = "pycorrtree", skip_from_py_object)]
#[derive(Clone)]
pub struct DistanceMatrix(corrtree::DistanceMatrix);

#[pymethods]
impl DistanceMatrix {
    #[new]
    fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        corrtree::DistanceMatrix::from_rows(labels, &rows)
            .map(DistanceMatrix)
            .map_err(err)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    fn get(&self, a: &str, b: &str) -> PyResult<f64> {
        let (i, j) = lookup(self.0.matrix(), a, b)?;
        Ok(self.0.get(i, j))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        self.0.matrix().to_rows()
    }

    fn to_csv(&self) -> String {
        self.0.matrix().to_csv_string()
    }

    /// Metric-axiom violations as messages; empty when the matrix is a metric.
    #[pyo3(signature = (tol = corrtree::metric::DEFAULT_AXIOM_TOL))]
    fn check_axioms(&self, tol: f64) -> Vec<String> {
        check_metric_axioms(self.0.matrix(), tol)
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn mst(&self) -> PyResult<SpanningTree> {
        build_mst(self)
    }

    fn single_linkage(&self) -> PyResult<Dendrogram> {
        single_linkage(self)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

fn lookup(m: &corrtree::SymMatrix, a: &str, b: &str) -> PyResult<(usize, usize)> {
    let find = |l: &str| m.index_of(l).ok_or_else(|| err(Error::Lookup(l.to_string())));
    Ok((find(a)?, find(b)?))
}

#[pyclass(module = "pycorrtree", skip_from_py_object)]
#[derive(Clone)]
pub struct SpanningTree(corrtree::SpanningTree);

#[pymethods]
impl SpanningTree {
    #[new]
    fn new(labels: Vec<String>, edges: Vec<(String, String, f64)>) -> PyResult<Self> {
        corrtree::SpanningTree::from_edges(labels, &edges)
            .map(SpanningTree)
            .map_err(err)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    /// `(a, b, weight, order)` in construction order.
    #[getter]
    fn edges(&self) -> Vec<(String, String, f64, usize)> {
        self.0
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = self.0.edge_labels(e);
                (a.to_string(), b.to_string(), e.weight, e.order)
            })
            .collect()
    }

    #[getter]
    fn total_weight(&self) -> f64 {
        self.0.total_weight()
    }

    fn degrees(&self) -> BTreeMap<String, usize> {
        self.0.degrees()
    }

    fn is_connected_subtree(&self, members: Vec<String>) -> bool {
        is_connected_subtree(&self.0, &members)
    }

    fn survival(&self, other: &SpanningTree) -> PyResult<f64> {
        edge_survival(self, other)
    }

    fn ultrametric(&self) -> Vec<Vec<f64>> {
        subdominant_ultrametric(&self.0).matrix().to_rows()
    }

    fn dendrogram(&self) -> Dendrogram {
        Dendrogram(dendrogram_from_tree(&self.0))
    }

    fn to_dot(&self) -> String {
        export_dot(&self.0)
    }

    fn to_graphml(&self) -> String {
        export_graphml(&self.0)
    }

    fn to_json(&self) -> String {
        tree_json(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &SpanningTree) -> bool {
        self.0 == other.0
    }
}

#[pyclass(module = "pycorrtree", skip_from_py_object)]
#[derive(Clone)]
pub struct Dendrogram(corrtree::Dendrogram);

#[pymethods]
impl Dendrogram {
    #[getter]
    fn leaves(&self) -> Vec<String> {
        self.0.leaves().to_vec()
    }

    /// `(left, right, height, size)`; leaves are clusters `0..n`, merge `k`
    /// creates cluster `n + k`.
    #[getter]
    fn merges(&self) -> Vec<(usize, usize, f64, usize)> {
        self.0
            .merges()
            .iter()
            .map(|m| (m.left, m.right, m.height, m.size))
            .collect()
    }

    #[getter]
    fn heights(&self) -> Vec<f64> {
        self.0.heights()
    }

    fn cophenetic(&self) -> Vec<Vec<f64>> {
        self.0.cophenetic().matrix().to_rows()
    }

    /// Clusters formed by merges at or below `height`.
    fn cut(&self, height: f64) -> Vec<Vec<String>> {
        self.0.cut(height)
    }

    fn to_newick(&self) -> String {
        export_newick(&self.0)
    }
}

#[pyfunction]
fn rho_to_distance(rho: f64) -> PyResult<f64> {
    rho_to_d(rho).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (returns, min_overlap = corrtree::DEFAULT_MIN_OVERLAP))]
fn pearson(returns: &Returns, min_overlap: usize) -> PyResult<CorrelationMatrix> {
    pearson_matrix(&returns.0, min_overlap)
        .map(CorrelationMatrix)
        .map_err(err)
}

#[pyfunction]
fn build_mst(d: &DistanceMatrix) -> PyResult<SpanningTree> {
    corrtree::mst::build_mst(&d.0).map(SpanningTree).map_err(err)
}

/// Tree plus every candidate link examined, as `(a, b, weight, accepted)`.
#[pyfunction]
fn build_mst_trace(d: &DistanceMatrix) -> PyResult<(SpanningTree, Vec<Step>)> {
    let (tree, steps) = build_mst_traced(&d.0).map_err(err)?;
    let steps = steps
        .into_iter()
        .map(|s| (s.a, s.b, s.weight, s.accepted))
        .collect();
    Ok((SpanningTree(tree), steps))
}

#[pyfunction]
fn single_linkage(d: &DistanceMatrix) -> PyResult<Dendrogram> {
    corrtree::ultrametric::single_linkage(&d.0)
        .map(Dendrogram)
        .map_err(err)
}

/// Fraction of links shared by two trees over the same assets.
#[pyfunction]
fn edge_survival(a: &SpanningTree, b: &SpanningTree) -> PyResult<f64> {
    dynamics::edge_survival(&a.0, &b.0).map_err(err)
}

/// Trees over windows of `width` observations, starts `step` apart.
/// Returns `(windows, trees)` where windows are `(start, end)` with `end`
/// exclusive.
#[pyfunction]
#[pyo3(signature = (returns, width, step = 1, min_overlap = corrtree::DEFAULT_MIN_OVERLAP))]
fn rolling_trees(
    returns: &Returns,
    width: usize,
    step: usize,
    min_overlap: usize,
) -> PyResult<(Vec<Window>, Vec<SpanningTree>)> {
    let w = WindowSpec::new(width, step).map_err(err)?;
    let seq = dynamics::rolling_trees(&returns.0, w, min_overlap).map_err(err)?;
    Ok((seq.windows, seq.trees.into_iter().map(SpanningTree).collect()))
}

/// Group-factor returns. Labels are `G<g>_<k>`.
#[pyfunction]
#[pyo3(signature = (groups = 3, size = 10, loading = 0.8, noise = 0.6, length = 1000, seed = 0, global_loading = 0.0))]
fn generate(
    groups: usize,
    size: usize,
    loading: f64,
    noise: f64,
    length: usize,
    seed: u64,
    global_loading: f64,
) -> PyResult<Returns> {
    let mut spec = FactorModelSpec::uniform(groups, size, loading, noise, length, seed);
    spec.global_loading = global_loading;
    corrtree::synthgen::generate(&spec).map(Returns).map_err(err)
}

/// Price levels starting at `start` whose log returns are `returns`.
#[pyfunction]
#[pyo3(signature = (returns, start = 100.0))]
fn to_prices(returns: &Returns, start: f64) -> PyResult<Panel> {
    corrtree::synthgen::to_prices(&returns.0, start)
        .map(Panel)
        .map_err(err)
}

/// Full pipeline into `out_dir`. Returns the census and the written paths.
#[pyfunction]
#[pyo3(signature = (
    input, out_dir, signal = "log-return", formats = None, rebase = None,
    numeraire = "NUMERAIRE", width = None, step = 1, min_overlap = corrtree::DEFAULT_MIN_OVERLAP
))]
#[allow(clippy::too_many_arguments)]
fn run_pipeline(
    input: PathBuf,
    out_dir: PathBuf,
    signal: &str,
    formats: Option<Vec<String>>,
    rebase: Option<String>,
    numeraire: &str,
    width: Option<usize>,
    step: usize,
    min_overlap: usize,
) -> PyResult<(BTreeMap<&'static str, usize>, Vec<PathBuf>)> {
    let mut cfg = PipelineConfig::new(input, out_dir);
    cfg.signal = kind(signal)?;
    if let Some(f) = formats {
        cfg.formats = f
            .iter()
            .map(|s| s.parse::<ExportFormat>())
            .collect::<Result<_, _>>()
            .map_err(err)?;
    }
    cfg.rebase = rebase.map(|base| Rebase {
        base,
        numeraire: numeraire.to_string(),
    });
    cfg.window = width.map(|w| WindowSpec::new(w, step)).transpose().map_err(err)?;
    cfg.min_overlap = min_overlap;
    let report = corrtree::pipeline::run_pipeline(&cfg).map_err(err)?;
    let c = report.census;
    let census = BTreeMap::from([("n", c.n_assets), ("strong", c.strong), ("weak", c.weak), ("negative", c.negative)]);
    Ok((census, report.written))
}

#[pymodule]
fn pycorrtree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CorrtreeError", m.py().get_type::<CorrtreeError>())?;
    m.add_class::<Panel>()?;
    m.add_class::<Returns>()?;
    m.add_class::<CorrelationMatrix>()?;
    m.add_class::<DistanceMatrix>()?;
    m.add_class::<SpanningTree>()?;
    m.add_class::<Dendrogram>()?;
    m.add_function(wrap_pyfunction!(rho_to_distance, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(build_mst, m)?)?;
    m.add_function(wrap_pyfunction!(build_mst_trace, m)?)?;
    m.add_function(wrap_pyfunction!(single_linkage, m)?)?;
    m.add_function(wrap_pyfunction!(edge_survival, m)?)?;
    m.add_function(wrap_pyfunction!(rolling_trees, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(to_prices, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
