//! Python bindings: symbols, grid functions, the singular kernel and the
//! verification runners. Configuration objects are passed as JSON strings in
//! the same schema as the `levymult` command.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use levy_multipliers::cli::{run_norm_sweep, run_verify, NormRatioRun, VerifyRun};
use levy_multipliers::kernel::{kernel_closed_form, kernel_truncated, pv_convolve, PvOptions};
use levy_multipliers::levy_measure::char_exponent;
use levy_multipliers::schema::{parse_json, MeasureDoc, ScenarioDoc, SymbolDoc};
use levy_multipliers::stochastic::{shipped_scenarios, CompensatorRule};
use levy_multipliers::transform::{apply_multiplier, lp_norm, GridFunction, SymbolTable};
use levy_multipliers::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A Fourier multiplier symbol built from its JSON description.
#[pyclass(name = "Symbol", module = "levy_multipliers_py", frozen)]
struct PySymbol {
    inner: levy_multipliers::symbol::MultiplierSymbol,
    doc: SymbolDoc,
}

#[pymethods]
impl PySymbol {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc: SymbolDoc = parse_json(text).map_err(to_py)?;
        let inner = doc.build().map_err(to_py)?;
        Ok(Self { inner, doc })
    }

    /// `M(ξ)`.
    fn eval(&self, xi: Vec<f64>) -> PyResult<Complex64> {
        self.inner.eval(&xi).map_err(to_py)
    }

    /// `m_s` for a window start `s < 0`.
    fn finite_time(&self, s: f64) -> PyResult<Self> {
        let inner = self.inner.finite_time(s).map_err(to_py)?;
        let doc = SymbolDoc::from_kind(inner.kind());
        Ok(Self { inner, doc })
    }

    /// Values on the DFT frequency grid, row-major in DFT order.
    #[pyo3(signature = (dims, period=None))]
    fn table(&self, dims: Vec<usize>, period: Option<Vec<f64>>) -> PyResult<Vec<Complex64>> {
        let period = period.unwrap_or_else(|| vec![2.0 * std::f64::consts::PI; dims.len()]);
        Ok(SymbolTable::new(&self.inner, &dims, &period)
            .map_err(to_py)?
            .values()
            .to_vec())
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.doc).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Symbol({})",
            serde_json::to_string(&self.doc).unwrap_or_default()
        )
    }
}

/// Samples of a periodic function on a regular 1-d or 2-d grid.
#[pyclass(name = "Grid", module = "levy_multipliers_py", frozen)]
struct PyGrid {
    inner: GridFunction,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(dims: Vec<usize>, period: Vec<f64>, samples: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: GridFunction::new(dims, period, samples).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Ok(Self {
            inner: GridFunction::read_binary(BufReader::new(file)).map_err(to_py)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        let mut w = BufWriter::new(
            File::create(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?,
        );
        self.inner.write_binary(&mut w).map_err(to_py)?;
        w.flush().map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    #[getter]
    fn period(&self) -> Vec<f64> {
        self.inner.period().to_vec()
    }

    #[getter]
    fn samples(&self) -> Vec<Complex64> {
        self.inner.samples().to_vec()
    }

    fn apply(&self, symbol: &PySymbol) -> PyResult<Self> {
        Ok(Self {
            inner: apply_multiplier(&self.inner, &symbol.inner).map_err(to_py)?,
        })
    }

    /// Principal-value convolution with the kernel along `axis`.
    #[pyo3(signature = (rho, axis=0, midpoint_images=None))]
    fn pv_convolve(&self, rho: f64, axis: usize, midpoint_images: Option<usize>) -> PyResult<Self> {
        let opts = match midpoint_images {
            Some(images) => PvOptions::midpoint(rho, images),
            None => PvOptions::new(rho),
        }
        .with_axis(axis);
        Ok(Self {
            inner: pv_convolve(&self.inner, &opts).map_err(to_py)?,
        })
    }

    /// Discrete `L^p` norm with the cell volume as weight.
    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        lp_norm(&self.inner, p).map_err(to_py)
    }

    fn without_mean(&self) -> Self {
        Self {
            inner: self.inner.without_mean(),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(dims={:?}, period={:?})",
            self.inner.dims(),
            self.inner.period()
        )
    }
}

/// Characteristic exponent `Ψ(ξ)` of a measure given as JSON.
#[pyfunction]
fn characteristic_exponent(measure_json: &str, xi: Vec<f64>) -> PyResult<f64> {
    let doc: MeasureDoc = parse_json(measure_json).map_err(to_py)?;
    let (measure, _) = doc.build().map_err(to_py)?;
    char_exponent(&measure, &xi).map_err(to_py)
}

/// Closed-form kernel `K(x, y)`.
#[pyfunction]
fn kernel(x: f64, y: f64) -> PyResult<f64> {
    kernel_closed_form(x, y).map_err(to_py)
}

/// Kernel with the time integral restricted to `[epsilon, t_max]`.
#[pyfunction]
#[pyo3(signature = (epsilon, t_max, x, y, tol=1e-12))]
fn kernel_window(epsilon: f64, t_max: f64, x: f64, y: f64, tol: f64) -> PyResult<f64> {
    kernel_truncated(epsilon, t_max, x, y, tol).map_err(to_py)
}

/// `(symbol_id, p, bound, max_ratio, argmax_id)`
type SweepTuple = (String, f64, f64, f64, String);

/// Norm-ratio sweep; returns `(symbol_id, p, bound, max_ratio, argmax_id)` rows.
#[pyfunction]
#[pyo3(signature = (config_json="{}", seed=None))]
fn norm_sweep(py: Python<'_>, config_json: &str, seed: Option<u64>) -> PyResult<Vec<SweepTuple>> {
    let cfg: NormRatioRun = parse_json(config_json).map_err(to_py)?;
    let rows = py.detach(|| run_norm_sweep(&cfg, seed)).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|(id, r)| (id, r.p, r.bound, r.max_ratio, r.argmax_id))
        .collect())
}

/// Runs the verification suite and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (config_json="{}"))]
fn verify(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg: VerifyRun = parse_json(config_json).map_err(to_py)?;
    let report = py.detach(|| run_verify(&cfg, None)).map_err(to_py)?;
    serde_json::to_string(&report).map_err(json_err)
}

/// JSON descriptions of the built-in scenarios.
#[pyfunction]
fn scenarios() -> PyResult<Vec<String>> {
    shipped_scenarios()
        .map_err(to_py)?
        .iter()
        .map(|s| serde_json::to_string(&ScenarioDoc::from_scenario(s)).map_err(json_err))
        .collect()
}

/// Simulates a scenario; returns `(G_u, F_u, [G]_u, [F]_u)` per path.
#[pyfunction]
fn simulate(
    py: Python<'_>,
    scenario_json: &str,
    n_paths: usize,
    seed: u64,
) -> PyResult<Vec<(Complex64, Complex64, f64, f64)>> {
    let doc: ScenarioDoc = parse_json(scenario_json).map_err(to_py)?;
    let sc = doc.build(None).map_err(to_py)?;
    let pairs = py
        .detach(|| sc.simulate(n_paths, seed, &[], CompensatorRule::Exact))
        .map_err(to_py)?;
    Ok(pairs
        .iter()
        .map(|p| (p.g_final, p.f_final, p.qv_g, p.qv_f))
        .collect())
}

#[pymodule]
fn levy_multipliers_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymbol>()?;
    m.add_class::<PyGrid>()?;
    m.add_function(wrap_pyfunction!(characteristic_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_window, m)?)?;
    m.add_function(wrap_pyfunction!(norm_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
