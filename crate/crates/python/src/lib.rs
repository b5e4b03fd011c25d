//! Python bindings: tube laws, single-vessel benchmark runs and network
//! simulations, with results returned as plain lists and dicts.

use std::path::PathBuf;

use hemowb::harness::{self, presets, NetworkConfig, Prepared, RunConfig, SnapshotRow};
use hemowb::network::{single_vessel_rcr, InitialState, NetworkSimulation};
use hemowb::scheme::SchemeConfig;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(hemowb, HemowbError, PyException, "Error raised by the hemowb solver.");

fn err(e: hemowb::Error) -> PyErr {
    HemowbError::new_err(e.to_string())
}

fn columns<'py>(py: Python<'py>, rows: &[SnapshotRow]) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let col = |f: fn(&SnapshotRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    d.set_item("x", col(|r| r.x))?;
    d.set_item("A", col(|r| r.a))?;
    d.set_item("q", col(|r| r.q))?;
    d.set_item("A_over_A0", col(|r| r.a_over_a0))?;
    d.set_item("u", col(|r| r.u))?;
    d.set_item("p", col(|r| r.p))?;
    d.set_item("Gamma", col(|r| r.gamma))?;
    Ok(d)
}

/// `phi(a) = a^m - a^n`.
#[pyclass(name = "TubeLaw", module = "hemowb", frozen)]
struct PyTubeLaw {
    inner: hemowb::TubeLaw,
}

#[pymethods]
impl PyTubeLaw {
    #[new]
    fn new(m: f64, n: f64) -> PyResult<Self> {
        Ok(Self { inner: hemowb::TubeLaw::new(m, n).map_err(err)? })
    }

    /// `m = 1/2, n = 0`.
    #[staticmethod]
    fn arterial() -> Self {
        Self { inner: hemowb::TubeLaw::arterial() }
    }

    #[getter]
    fn m(&self) -> f64 {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> f64 {
        self.inner.n()
    }

    fn phi(&self, a: f64) -> f64 {
        self.inner.phi(a)
    }

    fn dphi(&self, a: f64) -> f64 {
        self.inner.dphi(a)
    }

    fn __repr__(&self) -> String {
        format!("TubeLaw(m={}, n={})", self.inner.m(), self.inner.n())
    }
}

/// A single-vessel test case set up on its mesh.
#[pyclass(name = "VesselRun", module = "hemowb", unsendable)]
struct PyVesselRun {
    inner: Prepared,
}

#[pymethods]
impl PyVesselRun {
    /// Bundled test `test1` .. `test7`.
    #[staticmethod]
    #[pyo3(signature = (name, order = 2, well_balanced = true, cfl = 0.5, cells = None, t_end = None))]
    fn preset(name: &str, order: u8, well_balanced: bool, cfl: f64, cells: Option<usize>, t_end: Option<f64>) -> PyResult<Self> {
        let mut case = presets::preset(name).map_err(err)?;
        if let Some(n) = cells {
            if case.name == "test5" {
                case = presets::test5_with_cells(n);
            }
            case.cells = n;
        }
        if let Some(t) = t_end {
            case.t_end = t;
        }
        let inner = harness::prepare(&case, SchemeConfig { order, well_balanced, cfl }).map_err(err)?;
        Ok(Self { inner })
    }

    /// Case and scheme from a TOML run configuration.
    #[staticmethod]
    fn from_config(path: PathBuf) -> PyResult<Self> {
        let cfg = RunConfig::load(&path).map_err(err)?;
        let case = cfg.case().map_err(err)?;
        Ok(Self { inner: harness::prepare(&case, cfg.scheme()).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.case.name.clone()
    }

    #[getter]
    fn cells(&self) -> usize {
        self.inner.case.cells
    }

    /// Current time [s].
    #[getter]
    fn time(&self) -> f64 {
        self.inner.sim.time * self.inner.scaling.time
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.case.t_end
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.sim.steps
    }

    /// One CFL-limited step, clipped at the end time.
    fn step(&mut self) -> PyResult<()> {
        let sim = &mut self.inner.sim;
        let dt = sim.time_step().map_err(err)?.min(self.inner.case.t_end / self.inner.scaling.time - sim.time);
        if dt > 0.0 {
            sim.step(dt).map_err(err)?;
        }
        Ok(())
    }

    /// Runs to the end time of the case.
    fn run(&mut self) -> PyResult<()> {
        self.inner.run(|_| {}).map_err(err)
    }

    /// Nondimensional `(L1(A/A0), L1(u))` against the stationary solution, or `None`.
    fn stationary_errors(&self) -> PyResult<Option<(f64, f64)>> {
        if self.inner.stationary.is_none() {
            return Ok(None);
        }
        let e = self.inner.stationary_errors().map_err(err)?;
        Ok(Some((e.area_ratio, e.velocity)))
    }

    /// Columns `x, A, q, A_over_A0, u, p, Gamma` (SI).
    fn snapshot<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        columns(py, &self.inner.snapshot().map_err(err)?)
    }

    /// `(t, p_mid, q_mid)` at the middle cell.
    fn midpoint(&self) -> PyResult<(f64, f64, f64)> {
        let s = self.inner.midpoint_sample().map_err(err)?;
        Ok((s.t, s.p_mid, s.q_mid))
    }

    fn write_snapshot(&self, path: PathBuf) -> PyResult<()> {
        harness::write_snapshot(&path, &self.inner.snapshot().map_err(err)?).map_err(err)
    }
}

/// A network of vessels coupled at junctions and boundaries (CGS units).
#[pyclass(name = "Network", module = "hemowb", unsendable)]
struct PyNetwork {
    inner: NetworkSimulation,
    t_end: Option<f64>,
}

#[pymethods]
impl PyNetwork {
    /// One vein with a prescribed inflow and an RCR outlet.
    #[staticmethod]
    #[pyo3(signature = (cells = 10, order = 2, well_balanced = true))]
    fn single_vessel_rcr(cells: usize, order: u8, well_balanced: bool) -> PyResult<Self> {
        let spec = single_vessel_rcr(cells).map_err(err)?;
        let inner =
            NetworkSimulation::new(spec, SchemeConfig::new(order, well_balanced), InitialState::Rest { pressure: 0.0 }).map_err(err)?;
        Ok(Self { inner, t_end: None })
    }

    /// Network experiment from a TOML configuration; relative paths resolve
    /// against the file's directory.
    #[staticmethod]
    fn from_config(path: PathBuf) -> PyResult<Self> {
        let cfg = NetworkConfig::load(&path).map_err(err)?;
        let base = path.parent().map(PathBuf::from).unwrap_or_default();
        let run = cfg.resolve(&base).map_err(err)?;
        let inner = NetworkSimulation::new(run.spec, run.scheme, run.initial).map_err(err)?;
        Ok(Self { inner, t_end: Some(run.t_end) })
    }

    /// End time from the configuration, if any [s].
    #[getter]
    fn t_end(&self) -> Option<f64> {
        self.t_end
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.seconds()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[getter]
    fn vessel_names(&self) -> Vec<String> {
        self.inner.spec.vessels.iter().map(|v| v.name.clone()).collect()
    }

    /// Advances to `t` seconds.
    fn run_until(&mut self, t: f64) -> PyResult<()> {
        self.inner.run_until(t, |_| Ok(())).map_err(err)
    }

    fn max_abs_flow(&self) -> f64 {
        self.inner.max_abs_flow()
    }

    #[getter]
    fn max_mass_residual(&self) -> f64 {
        self.inner.max_mass_residual
    }

    /// `max |p - p_hyd|` [dyn/cm^2].
    fn hydrostatic_deviation(&self) -> PyResult<f64> {
        self.inner.hydrostatic_deviation().map_err(err)
    }

    /// Capacitor pressures of the Windkessel terminals, keyed by node.
    fn capacitor_pressures(&self) -> std::collections::BTreeMap<usize, f64> {
        self.inner.capacitor_pressures()
    }

    /// Columns `x, A, q, A_over_A0, u, p, Gamma` of vessel `k`.
    fn snapshot<'py>(&self, py: Python<'py>, k: usize) -> PyResult<Bound<'py, PyDict>> {
        if k >= self.inner.vessel_count() {
            return Err(HemowbError::new_err(format!("no vessel {k}")));
        }
        columns(py, &self.inner.snapshot(k).map_err(err)?)
    }
}

/// `dx * sum |a_i - b_i|`.
#[pyfunction]
fn l1_norm(a: Vec<f64>, b: Vec<f64>, dx: f64) -> PyResult<f64> {
    harness::l1_norm(&a, &b, dx).map_err(err)
}

/// Names of the bundled single-vessel tests.
#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    vec!["test1", "test2", "test3", "test4", "test5", "test6", "test7"]
}

#[pymodule]
#[pyo3(name = "hemowb")]
fn hemowb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTubeLaw>()?;
    m.add_class::<PyVesselRun>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(l1_norm, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add("HemowbError", m.py().get_type::<HemowbError>())?;
    Ok(())
}
