//! Python bindings: machines, egg search, weight optimization and growth series.

use growthbound::formats::record::RunRecord;
use growthbound::formats::zoo;
use growthbound::growth::growth as growth_series;
use growthbound::opt::{MinimaxProblem, OptOptions};
use growthbound::strategy::{run_opt as run_opt_core, Caps, StrategyOptions};
use growthbound::{search_egg, Context, PortraitCaps, SearchConfig, Weights};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A machine together with its verified cover and weight constraints.
#[pyclass(name = "Machine", frozen)]
struct PyMachine {
    ctx: Context,
}

impl PyMachine {
    fn weights(&self, w: Option<Vec<f64>>) -> PyResult<Weights> {
        match w {
            None => Ok(self.ctx.uniform()),
            Some(raw) => Ok(self.ctx.ingest(&raw).map_err(err)?.weights),
        }
    }
}

#[pymethods]
impl PyMachine {
    /// Builtin name or automaton text; `blocks` overrides the cover.
    #[new]
    #[pyo3(signature = (source, blocks = None))]
    fn new(source: &str, blocks: Option<&str>) -> PyResult<Self> {
        let ctx = Context::resolve(source, blocks, PortraitCaps::default()).map_err(err)?;
        Ok(PyMachine { ctx })
    }

    #[getter]
    fn name(&self) -> String {
        self.ctx.name.clone()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.ctx.degree()
    }

    #[getter]
    fn generators(&self) -> Vec<String> {
        self.ctx.group.gen_names()
    }

    #[getter]
    fn blocks(&self) -> String {
        self.ctx.aux.describe(&self.ctx.group)
    }

    /// Weights after normalization and, if needed, projection.
    fn ingest(&self, weights: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.weights(Some(weights))?.as_slice().to_vec())
    }

    /// Contraction ratio of a single word.
    #[pyo3(signature = (word, weights = None))]
    fn eta(&self, word: &str, weights: Option<Vec<f64>>) -> PyResult<f64> {
        let w = self.ctx.group.parse_word(word).map_err(err)?;
        growthbound::eta_of(&self.ctx.table, &w, &self.weights(weights)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Machine({:?}, blocks={:?})", self.ctx.name, self.blocks())
    }
}

#[pyclass(name = "SearchResult", frozen)]
struct PySearchResult {
    record: RunRecord,
    shell: Vec<(String, f64)>,
    rows: Vec<growthbound::WordStats>,
}

#[pymethods]
impl PySearchResult {
    #[getter]
    fn status(&self) -> String {
        self.record.status.clone()
    }

    #[getter]
    fn found(&self) -> bool {
        self.record.status == "found"
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.record.eta
    }

    #[getter]
    fn alpha(&self) -> Option<f64> {
        self.record.alpha
    }

    #[getter]
    fn radius(&self) -> usize {
        self.record.radius
    }

    #[getter]
    fn egg_size(&self) -> usize {
        self.record.egg_size
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.record.weights.clone()
    }

    #[getter]
    fn per_level_sizes(&self) -> Vec<usize> {
        self.record.per_level_sizes.clone()
    }

    /// Shell words with their ratios.
    #[getter]
    fn shell(&self) -> Vec<(String, f64)> {
        self.shell.clone()
    }

    /// The run record as a JSON string.
    fn to_json(&self) -> String {
        serde_json::to_string(&self.record).expect("records serialize")
    }

    fn __repr__(&self) -> String {
        format!(
            "SearchResult(status={:?}, eta={:.6}, radius={}, egg_size={})",
            self.record.status, self.record.eta, self.record.radius, self.record.egg_size
        )
    }
}

/// Search for an egg under fixed weights (uniform by default).
#[pyfunction]
#[pyo3(signature = (machine, weights = None, target = 0.99, radius_cap = 256))]
fn search(py: Python<'_>, machine: &PyMachine, weights: Option<Vec<f64>>, target: f64, radius_cap: usize) -> PyResult<PySearchResult> {
    let pi = machine.weights(weights)?;
    let ctx = &machine.ctx;
    let cfg = SearchConfig::new(target).radius_cap(radius_cap);
    let res = py
        .detach(|| search_egg(ctx.table.clone(), pi, &ctx.constraints, &cfg))
        .map_err(err)?
        .0;
    let shell = res.shell.iter().map(|s| (ctx.group.format_word(&s.word), s.eta)).collect();
    Ok(PySearchResult { record: RunRecord::from_result(ctx, &res), shell, rows: res.count_rows() })
}

/// Minimize the largest shell ratio of a found egg over feasible weights.
/// Returns `(weights, eta)`.
#[pyfunction]
#[pyo3(signature = (machine, result, seed = 0, restarts = 16))]
fn optimize(machine: &PyMachine, result: &PySearchResult, seed: u64, restarts: usize) -> PyResult<(Vec<f64>, f64)> {
    let p = MinimaxProblem::new(&result.rows, machine.ctx.constraints.clone()).map_err(err)?;
    let opts = OptOptions { seed, restarts, ..OptOptions::default() };
    let r = p.optimize(&result.record.weights, &opts).map_err(err)?;
    Ok((r.weights.as_slice().to_vec(), r.eta))
}

/// Alternate searches and optimization over a schedule of targets.
/// Returns the record of the best certified round as JSON, or None.
#[pyfunction]
#[pyo3(signature = (machine, targets, weights = None, update = None, seed = 0, radius_cap = 256))]
fn run_opt(
    py: Python<'_>,
    machine: &PyMachine,
    targets: Vec<f64>,
    weights: Option<Vec<f64>>,
    update: Option<usize>,
    seed: u64,
    radius_cap: usize,
) -> PyResult<Option<String>> {
    let pi = machine.weights(weights)?;
    let ctx = &machine.ctx;
    let opts = StrategyOptions {
        caps: Caps { radius_cap, ..Caps::default() },
        opt: OptOptions { seed, ..OptOptions::default() },
        checkpoints: false,
    };
    let run = py.detach(|| run_opt_core(ctx, &pi, &targets, update, &opts)).map_err(err)?;
    Ok(run.best().map(|r| serde_json::to_string(&RunRecord::from_round(ctx, r, Some(seed))).expect("records serialize")))
}

/// Growth exponent certified by ratio `eta` on a degree-`d` tree.
#[pyfunction]
fn alpha(eta: f64, d: usize) -> PyResult<f64> {
    growthbound::alpha_from(eta, d).map_err(err)
}

/// Ball sizes up to `maxlen` in the uniform word metric.
#[pyfunction]
#[pyo3(signature = (machine, maxlen, max_ball = 5_000_000))]
fn growth(py: Python<'_>, machine: &PyMachine, maxlen: usize, max_ball: usize) -> Vec<u64> {
    py.detach(|| growth_series(&machine.ctx.table, maxlen, max_ball)).gamma
}

/// Names of the builtin machines.
#[pyfunction]
fn builtins() -> Vec<String> {
    zoo::list().into_iter().map(|e| e.name.to_string()).collect()
}

#[pymodule(name = "growthbound")]
fn growthbound_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMachine>()?;
    m.add_class::<PySearchResult>()?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(run_opt, m)?)?;
    m.add_function(wrap_pyfunction!(alpha, m)?)?;
    m.add_function(wrap_pyfunction!(growth, m)?)?;
    m.add_function(wrap_pyfunction!(builtins, m)?)?;
    m.add("__version__", growthbound::VERSION)?;
    Ok(())
}
