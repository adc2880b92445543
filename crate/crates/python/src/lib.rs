//! Gym-style Python bindings for the simulator.

use indbench::miscal::{miscal_penalty, GoldstoneConstants};
use indbench::{generate_batch as core_generate_batch, Action, BehaviorPolicy, EnvConfig, Environment, Error};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn to_py(e: Error) -> PyErr {
    if e.is_io() {
        PyIOError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn space<'py>(py: Python<'py>, low: f64, high: f64, dim: usize) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("low", vec![low; dim])?;
    d.set_item("high", vec![high; dim])?;
    d.set_item("shape", (dim,))?;
    d.set_item("dtype", "float64")?;
    Ok(d)
}

/// Industrial benchmark environment with a Gym-style interface.
///
/// Observations are flat lists in the order (p, v, g, h, c, f).
#[pyclass(name = "IndustrialBenchmark")]
struct PyEnv {
    inner: Option<Environment>,
    horizon: Option<u64>,
}

impl PyEnv {
    fn env(&mut self) -> PyResult<&mut Environment> {
        self.inner
            .as_mut()
            .ok_or_else(|| PyRuntimeError::new_err("environment is closed"))
    }
}

#[pymethods]
impl PyEnv {
    /// `config` is a mapping with the keys of the JSON config schema;
    /// missing keys take their defaults.
    #[new]
    #[pyo3(signature = (config=None, horizon=None))]
    fn new(py: Python<'_>, config: Option<Bound<'_, PyDict>>, horizon: Option<u64>) -> PyResult<Self> {
        let cfg = match config {
            Some(c) => {
                let text: String = py.import("json")?.call_method1("dumps", (c,))?.extract()?;
                EnvConfig::from_json(&text).map_err(to_py)?
            }
            None => EnvConfig::default(),
        };
        Ok(Self {
            inner: Some(Environment::new(cfg).map_err(to_py)?),
            horizon,
        })
    }

    #[pyo3(signature = (seed=None))]
    fn reset(&mut self, seed: Option<u64>) -> PyResult<Vec<f64>> {
        Ok(self.env()?.reset(seed).to_array().to_vec())
    }

    /// Returns (observation, reward, terminated, truncated, info).
    fn step<'py>(
        &mut self,
        py: Python<'py>,
        action: [f64; 3],
    ) -> PyResult<(Vec<f64>, f64, bool, bool, Bound<'py, PyDict>)> {
        let horizon = self.horizon;
        let env = self.env()?;
        let r = env.step(Action::from_array(action)).map_err(to_py)?;
        let info = PyDict::new(py);
        info.set_item("t", env.steps())?;
        info.set_item("penalty", r.latents.penalty)?;
        info.set_item("opcost", r.latents.opcost)?;
        let truncated = horizon.is_some_and(|h| env.steps() >= h);
        Ok((r.observation.to_array().to_vec(), r.reward, false, truncated, info))
    }

    fn observe(&mut self) -> PyResult<Vec<f64>> {
        Ok(self.env()?.observe().to_array().to_vec())
    }

    /// Debug access to the 20-value Markov state.
    fn markov_state(&mut self) -> PyResult<Vec<f64>> {
        Ok(self.env()?.state().to_vector().to_vec())
    }

    fn serialize_state(&mut self) -> PyResult<Vec<u8>> {
        Ok(self.env()?.serialize_state())
    }

    #[staticmethod]
    fn from_state(bytes: Vec<u8>) -> PyResult<Self> {
        Ok(Self {
            inner: Some(Environment::deserialize_state(&bytes).map_err(to_py)?),
            horizon: None,
        })
    }

    fn close(&mut self) {
        self.inner = None;
    }

    #[getter]
    fn action_space<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        space(py, -1.0, 1.0, 3)
    }

    #[getter]
    fn observation_space<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        space(py, f64::NEG_INFINITY, f64::INFINITY, 6)
    }
}

/// Generates a batch; returns (rows, metadata) where each row has the 16
/// columns (p, v, g, h, c, f, dv, dg, dh, p', v', g', h', c', f', reward).
#[pyfunction]
#[pyo3(signature = (setpoints, steps, policy="random", seed=0))]
fn generate_batch<'py>(
    py: Python<'py>,
    setpoints: Vec<f64>,
    steps: usize,
    policy: &str,
    seed: u64,
) -> PyResult<(Bound<'py, PyList>, Bound<'py, PyDict>)> {
    let policy = BehaviorPolicy::parse(policy).map_err(to_py)?;
    let batch = core_generate_batch(&setpoints, steps, &policy, seed).map_err(to_py)?;
    let rows = PyList::empty(py);
    for rec in &batch.records {
        rows.append(rec.to_row().to_vec())?;
    }
    let meta = PyDict::new(py);
    meta.set_item("benchmark_version", &batch.metadata.benchmark_version)?;
    meta.set_item("seed", batch.metadata.seed)?;
    meta.set_item("setpoints", &batch.metadata.setpoints)?;
    meta.set_item("steps_per_setpoint", batch.metadata.steps_per_setpoint)?;
    meta.set_item("policy", &batch.metadata.policy)?;
    Ok((rows, meta))
}

#[pyfunction]
fn penalty(direction: i32, effective_shift: f64) -> PyResult<f64> {
    if !(-6..=6).contains(&direction) {
        return Err(PyValueError::new_err("direction must be in [-6, 6]"));
    }
    Ok(miscal_penalty(direction, effective_shift))
}

#[pyfunction]
fn goldstone_constants(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    let k = GoldstoneConstants::compute();
    let d = PyDict::new(py);
    for (name, x) in [
        ("epsilon", k.epsilon),
        ("zeta", k.zeta),
        ("lambda", k.lambda),
        ("alpha", k.alpha),
        ("beta", k.beta),
        ("kappa", k.kappa),
        ("safe_zone", k.safe_zone),
    ] {
        d.set_item(name, x)?;
    }
    Ok(d)
}

#[pymodule]
fn pyindbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnv>()?;
    m.add_function(wrap_pyfunction!(generate_batch, m)?)?;
    m.add_function(wrap_pyfunction!(penalty, m)?)?;
    m.add_function(wrap_pyfunction!(goldstone_constants, m)?)?;
    Ok(())
}
