//! Python bindings: grids, problems, states, propagators and the experiment runner.

use std::sync::Arc;

use hermite_fourier::analytic::coherent_state;
use hermite_fourier::schemes::BUILTIN_NAMES;
use hermite_fourier::{
    Grid, MagnusOrder, MethodSpec, Perturbation, Problem, Propagator, SplittingScheme, TimeFunction, WaveState,
};
use hf_experiments::config::ExperimentConfig;
use hf_experiments::output::write_table;
use hf_experiments::runner::{RunError, Runner};
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn core_err(e: hermite_fourier::Error) -> PyErr {
    use hermite_fourier::Error::*;
    match e {
        Horizon { .. } | Singular { .. } | NonFinite(_) | ReferenceNotConverged { .. } | BasisCeiling { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => value_err(e),
    }
}

#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(Arc<Grid>);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(a: f64, b: f64, n: usize) -> PyResult<Self> {
        Ok(Self(Arc::new(Grid::new(a, b, n).map_err(core_err)?)))
    }

    #[getter]
    fn points(&self) -> Vec<f64> {
        self.0.points().to_vec()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid({}, {}, {})", self.0.a(), self.0.b(), self.0.len())
    }
}

/// `i ψ_t = -(1/2μ) ψ_xx + (ω²(t)/2) x² ψ + εx⁴/4 ψ + σ|ψ|²ψ`.
#[pyclass(name = "Problem", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProblem(Problem);

#[pymethods]
impl PyProblem {
    /// `cosine=(amplitude, modulation, frequency)` makes `ω²` time dependent.
    #[new]
    #[pyo3(signature = (grid, omega_sq=1.0, mass=1.0, sigma=0.0, quartic=0.0, cosine=None))]
    fn new(
        grid: &PyGrid,
        omega_sq: f64,
        mass: f64,
        sigma: f64,
        quartic: f64,
        cosine: Option<(f64, f64, f64)>,
    ) -> PyResult<Self> {
        let trap = match cosine {
            Some((amplitude, modulation, frequency)) => TimeFunction::Cosine {
                amplitude,
                modulation,
                frequency,
            },
            None => TimeFunction::Constant(omega_sq),
        };
        let mut problem = Problem::harmonic(grid.0.clone())
            .with_mass(mass)
            .map_err(core_err)?
            .with_omega_sq(trap)
            .with_sigma(sigma);
        if quartic != 0.0 {
            problem = problem.with_perturbation(Perturbation::Quartic { strength: quartic });
        }
        Ok(Self(problem))
    }

    #[getter]
    fn is_linear(&self) -> bool {
        self.0.is_linear()
    }

    #[getter]
    fn is_autonomous(&self) -> bool {
        self.0.is_autonomous()
    }
}

#[pyclass(name = "WaveState", skip_from_py_object)]
#[derive(Clone)]
struct PyWaveState(WaveState);

#[pymethods]
impl PyWaveState {
    #[new]
    #[pyo3(signature = (grid, amplitudes, time=0.0))]
    fn new(grid: &PyGrid, amplitudes: Vec<Complex64>, time: f64) -> PyResult<Self> {
        Ok(Self(WaveState::new(grid.0.clone(), amplitudes, time).map_err(core_err)?))
    }

    /// Oscillator ground state displaced by `delta`.
    #[staticmethod]
    fn coherent(grid: &PyGrid, delta: f64) -> Self {
        Self(WaveState::from_fn(grid.0.clone(), |x| coherent_state(x, delta, 0.0)))
    }

    /// Normalized `exp(-(x - center)²/2)`.
    #[staticmethod]
    fn gaussian(grid: &PyGrid, center: f64) -> Self {
        Self(
            WaveState::from_fn(grid.0.clone(), |x| {
                Complex64::new((-(x - center) * (x - center) / 2.0).exp(), 0.0)
            })
            .normalized(),
        )
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.0.time()
    }

    fn norm(&self) -> f64 {
        self.0.norm_l2()
    }

    fn error(&self, other: &PyWaveState) -> PyResult<f64> {
        self.0.error_l2(&other.0).map_err(core_err)
    }

    fn copy(&self) -> Self {
        self.clone()
    }
}

fn method_spec(scheme: &str, split: &str, magnus: &str, basis_size: Option<usize>) -> PyResult<MethodSpec> {
    let scheme = SplittingScheme::builtin(scheme).map_err(core_err)?;
    let magnus = match magnus {
        "exact" => MagnusOrder::ExactConstant,
        "magnus4" => MagnusOrder::Magnus4,
        "magnus6" => MagnusOrder::Magnus6,
        other => return Err(value_err(format!("unknown magnus order '{other}'"))),
    };
    Ok(match split {
        "f" => MethodSpec::fourier(scheme),
        "hf" => MethodSpec::ho_fourier(scheme, magnus),
        "hermite" => MethodSpec::ho_hermite(
            scheme,
            basis_size.ok_or_else(|| value_err("the hermite split needs basis_size"))?,
        ),
        other => return Err(value_err(format!("unknown split '{other}'"))),
    })
}

#[pyclass(name = "Propagator")]
struct PyPropagator(Propagator);

#[pymethods]
impl PyPropagator {
    #[new]
    #[pyo3(signature = (problem, scheme="strang_bab", split="hf", magnus="exact", basis_size=None))]
    fn new(problem: &PyProblem, scheme: &str, split: &str, magnus: &str, basis_size: Option<usize>) -> PyResult<Self> {
        let method = method_spec(scheme, split, magnus, basis_size)?;
        Ok(Self(Propagator::new(problem.0.clone(), method).map_err(core_err)?))
    }

    #[getter]
    fn method(&self) -> String {
        self.0.method().id()
    }

    /// Advances `state` in place by one step; returns the cost of the step.
    fn step<'py>(&mut self, py: Python<'py>, state: &mut PyWaveState, h: f64) -> PyResult<Bound<'py, PyDict>> {
        let report = self.0.step(&mut state.0, h).map_err(core_err)?;
        cost_dict(py, &report)
    }

    /// Advances `state` in place to `t_final` in `n_steps` equal steps.
    fn propagate<'py>(
        &mut self,
        py: Python<'py>,
        state: &mut PyWaveState,
        t_final: f64,
        n_steps: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let report = self.0.propagate(&mut state.0, t_final, n_steps).map_err(core_err)?;
        cost_dict(py, &report)
    }

    fn energy(&mut self, state: &PyWaveState) -> f64 {
        self.0.energy(&state.0)
    }
}

fn cost_dict<'py>(py: Python<'py>, report: &hermite_fourier::propagator::StepReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n_fft_pairs", report.cost.n_fft_pairs)?;
    d.set_item("n_exponentials", report.cost.n_exponentials)?;
    d.set_item("warnings", report.warnings.clone())?;
    Ok(d)
}

/// Names of the built-in splitting schemes.
#[pyfunction]
fn schemes() -> Vec<&'static str> {
    BUILTIN_NAMES.to_vec()
}

/// Kick and drift coefficients of a built-in scheme.
#[pyfunction]
fn scheme_coefficients<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyDict>> {
    let s = SplittingScheme::builtin(name).map_err(core_err)?;
    let d = PyDict::new(py);
    d.set_item("kicks", s.kicks().to_vec())?;
    d.set_item("drifts", s.drifts().to_vec())?;
    d.set_item("order", s.order())?;
    d.set_item("stages", s.stages())?;
    Ok(d)
}

/// Runs a JSON experiment configuration and returns the CSV table.
#[pyfunction]
#[pyo3(signature = (config_json, workers=None))]
fn run(py: Python<'_>, config_json: &str, workers: Option<usize>) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json).map_err(value_err)?;
    config.validate().map_err(value_err)?;
    let table = py
        .detach(|| {
            let runner = match workers {
                Some(w) => Runner::new(w),
                None => Runner::from_env(),
            }?;
            runner.run(&config)
        })
        .map_err(|e| match e.exit_code() {
            2 => value_err(e),
            _ => PyArithmeticError::new_err(e.to_string()),
        })?;
    let mut buf = Vec::new();
    write_table(&table, &mut buf).map_err(|e| value_err(RunError::from(e)))?;
    String::from_utf8(buf).map_err(value_err)
}

/// Preset configuration as JSON.
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    hf_experiments::presets::preset(name)
        .map(|c| c.to_json())
        .ok_or_else(|| value_err(format!("unknown preset '{name}'")))
}

#[pymodule]
fn hfsplit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyWaveState>()?;
    m.add_class::<PyPropagator>()?;
    m.add_function(wrap_pyfunction!(schemes, m)?)?;
    m.add_function(wrap_pyfunction!(scheme_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    Ok(())
}
