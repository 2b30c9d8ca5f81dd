//! Python bindings for the `vstates` solver.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use vstates::continuation::{self, BranchOrigin, ContinuationError, SeedLadder};
use vstates::contour::{Boundary, VortexContourCoeffs};
use vstates::dispersion::{self, Eigenvalues};
use vstates::io::{BranchFile, StateFile};
use vstates::residual;
use vstates::solver::{self, SolveError, SolverConfig};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn solve_error(e: SolveError) -> PyErr {
    match e {
        SolveError::Contour(_) | SolveError::InvalidConfig(_) => value_error(e),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn continuation_error(e: ContinuationError) -> PyErr {
    match e {
        ContinuationError::EmptyBranch { .. } | ContinuationError::Solve(_) => PyRuntimeError::new_err(e.to_string()),
        _ => value_error(e),
    }
}

fn config(
    fold: usize,
    nodes: Option<usize>,
    modes: Option<usize>,
    tol: f64,
    max_iter: usize,
    fd_step: f64,
) -> PyResult<SolverConfig> {
    let nodes = nodes.unwrap_or_else(|| solver::default_nodes(fold));
    let base = SolverConfig::for_grid(fold, nodes);
    let cfg = SolverConfig { modes: modes.unwrap_or(base.modes), tol, max_iter, fd_step, ..base };
    cfg.validate(fold).map_err(solve_error)?;
    Ok(cfg)
}

/// Fourier coefficients of an m-fold symmetric pair of boundaries.
#[pyclass(name = "Coeffs", module = "vstates_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyCoeffs {
    inner: VortexContourCoeffs,
}

#[pymethods]
impl PyCoeffs {
    #[new]
    fn new(b: f64, m: usize, a1: Vec<f64>, a2: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: VortexContourCoeffs::new(b, m, a1, a2).map_err(value_error)? })
    }

    #[staticmethod]
    fn annulus(b: f64, m: usize, modes: usize) -> PyResult<Self> {
        Ok(Self { inner: VortexContourCoeffs::annulus(b, m, modes).map_err(value_error)? })
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.fold
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[getter]
    fn a1(&self) -> Vec<f64> {
        self.inner.a1.clone()
    }

    #[getter]
    fn a2(&self) -> Vec<f64> {
        self.inner.a2.clone()
    }

    /// Largest pointwise residual on `nodes` quadrature points.
    fn residual(&self, omega: f64, nodes: usize) -> PyResult<f64> {
        Ok(residual::assemble_unreduced(&self.inner, omega, nodes).map_err(value_error)?.max_abs)
    }

    /// Minimum distance between the two boundaries.
    fn distance(&self, nodes: usize) -> f64 {
        continuation::state_distance(&self.inner, nodes)
    }

    /// Points `(x, y)` on one boundary, `"outer"` or `"inner"`.
    fn points(&self, boundary: &str, samples: usize) -> PyResult<Vec<(f64, f64)>> {
        let which = match boundary {
            "outer" => Boundary::Outer,
            "inner" => Boundary::Inner,
            other => return Err(value_error(format!("unknown boundary {other:?}"))),
        };
        Ok((0..samples)
            .map(|j| {
                let theta = std::f64::consts::TAU * j as f64 / samples as f64;
                let z = self.inner.point(which, theta);
                (z.re, z.im)
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Coeffs(b={}, m={}, modes={})", self.inner.b, self.inner.fold, self.inner.modes())
    }
}

/// A solved state with its solver diagnostics.
#[pyclass(name = "State", module = "vstates_py", frozen)]
struct PyState {
    file: StateFile,
    history: Vec<f64>,
}

#[pymethods]
impl PyState {
    #[getter]
    fn omega(&self) -> f64 {
        self.file.omega
    }

    #[getter]
    fn coeffs(&self) -> PyResult<PyCoeffs> {
        Ok(PyCoeffs { inner: self.file.coeffs().map_err(value_error)? })
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.file.iterations
    }

    #[getter]
    fn residual_max(&self) -> f64 {
        self.file.residual_max
    }

    #[getter]
    fn converged(&self) -> bool {
        self.file.converged
    }

    #[getter]
    fn trivial(&self) -> bool {
        self.file.trivial
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.file.nodes
    }

    /// Residual after each Newton step; empty for states read from disk.
    #[getter]
    fn history(&self) -> Vec<f64> {
        self.history.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        self.file.to_json().map_err(value_error)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.file.write(&path).map_err(value_error)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { file: StateFile::read(&path).map_err(value_error)?, history: Vec::new() })
    }

    fn __repr__(&self) -> String {
        format!(
            "State(omega={}, iterations={}, residual_max={:e}, trivial={})",
            self.file.omega, self.file.iterations, self.file.residual_max, self.file.trivial
        )
    }
}

/// A continuation branch in `Ω`.
#[pyclass(name = "Branch", module = "vstates_py", frozen)]
struct PyBranch {
    file: BranchFile,
    states: Vec<StateFile>,
    reason: Option<String>,
}

#[pymethods]
impl PyBranch {
    #[getter]
    fn omegas(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.omega).collect()
    }

    #[getter]
    fn distances(&self) -> Vec<f64> {
        self.file.rows.iter().filter_map(|r| r.distance).collect()
    }

    #[getter]
    fn terminated_at(&self) -> Option<f64> {
        self.file.terminated_at()
    }

    #[getter]
    fn termination_reason(&self) -> Option<String> {
        self.reason.clone()
    }

    #[getter]
    fn origin(&self) -> &'static str {
        self.file.origin.as_str()
    }

    fn states(&self) -> Vec<PyState> {
        self.states.iter().map(|s| PyState { file: s.clone(), history: Vec::new() }).collect()
    }

    fn to_csv(&self) -> PyResult<String> {
        self.file.to_csv().map_err(value_error)
    }

    fn __len__(&self) -> usize {
        self.states.len()
    }

    fn __repr__(&self) -> String {
        format!("Branch(origin={}, states={})", self.file.origin, self.states.len())
    }
}

/// `(Ω⁻, Ω⁺)` for fold `m` at inner radius `b`, or `None` past the critical radius.
#[pyfunction]
fn eigenvalues(m: u32, b: f64) -> PyResult<Option<(f64, f64)>> {
    Ok(match dispersion::eigenvalues_for_fold(m, b).map_err(value_error)? {
        Eigenvalues::Feasible(p) => Some((p.omega_minus, p.omega_plus)),
        _ => None,
    })
}

/// Largest inner radius at which fold `m` bifurcates from the annulus.
#[pyfunction]
fn critical_radius(m: u32) -> PyResult<f64> {
    dispersion::critical_radius(m).map_err(value_error)
}

#[pyfunction]
fn feasibility(m: u32, b: f64) -> f64 {
    dispersion::feasibility(m, b)
}

#[pyfunction]
#[pyo3(signature = (n, lam, b))]
fn delta(n: u32, lam: f64, b: f64) -> PyResult<f64> {
    dispersion::delta(n, lam, b).map_err(value_error)
}

/// Newton solve at angular velocity `omega`.
///
/// The seed is either `seed` or the annulus with first-mode amplitudes
/// `seed_a1`, `seed_a2`.
#[pyfunction]
#[pyo3(signature = (
    b, m, omega, *, seed_a1 = 0.0, seed_a2 = 0.0, seed = None,
    nodes = None, modes = None, tol = 1e-12, max_iter = 50, fd_step = 1e-9,
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    b: f64,
    m: usize,
    omega: f64,
    seed_a1: f64,
    seed_a2: f64,
    seed: Option<PyCoeffs>,
    nodes: Option<usize>,
    modes: Option<usize>,
    tol: f64,
    max_iter: usize,
    fd_step: f64,
) -> PyResult<PyState> {
    let cfg = config(m, nodes, modes, tol, max_iter, fd_step)?;
    let start = match seed {
        Some(c) => c.inner,
        None => {
            let mut c = VortexContourCoeffs::annulus(b, m, cfg.modes).map_err(value_error)?;
            c.a1[0] = seed_a1;
            c.a2[0] = seed_a2;
            c
        }
    };
    let report = py.detach(|| solver::newton_solve(b, omega, m, &start, &cfg)).map_err(solve_error)?;
    Ok(PyState { file: StateFile::from_report(omega, &report, &cfg, false), history: report.history })
}

/// Natural-parameter continuation in `Ω`.
///
/// Pass `origin` (`"omega_minus"` or `"omega_plus"`) to start next to an
/// eigenvalue, or `start` and `end` for an explicit range.
#[pyfunction]
#[pyo3(signature = (
    b, m, *, origin = None, start = None, end = None, step = 1e-4,
    seeds = None, boundary = None, nodes = None, modes = None,
))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    b: f64,
    m: usize,
    origin: Option<&str>,
    start: Option<f64>,
    end: Option<f64>,
    step: f64,
    seeds: Option<Vec<f64>>,
    boundary: Option<&str>,
    nodes: Option<usize>,
    modes: Option<usize>,
) -> PyResult<PyBranch> {
    let cfg = config(m, nodes, modes, 1e-12, 50, 1e-9)?;
    let origin = origin.map(|o| o.parse::<BranchOrigin>().map_err(value_error)).transpose()?;
    let (start, end, signed) = match (origin, start, end) {
        (Some(o), None, None) => continuation::eigenvalue_range(b, m, o, step).map_err(continuation_error)?,
        (None, Some(s), Some(e)) => (s, e, if e < s { -step.abs() } else { step.abs() }),
        _ => return Err(value_error("give either origin or both start and end")),
    };
    let origin = origin.unwrap_or(BranchOrigin::from_step(signed));
    let mut ladder = SeedLadder::for_origin(origin);
    if let Some(b) = boundary {
        ladder = match b {
            "outer" => SeedLadder::outer(),
            "inner" => SeedLadder::inner(),
            other => return Err(value_error(format!("unknown boundary {other:?}"))),
        };
    }
    if let Some(amps) = seeds {
        ladder.amplitudes = amps;
    }
    let branch = py
        .detach(|| continuation::sweep(b, m, start, end, signed, &ladder, &cfg))
        .map_err(continuation_error)?;
    let states = branch.records.iter().map(|r| StateFile::from_report(r.omega, &r.report, &cfg, false)).collect();
    Ok(PyBranch {
        file: BranchFile::from_branch(&branch, &cfg, false),
        states,
        reason: branch.termination_reason.clone(),
    })
}

/// SVG drawing of a family of states, coloured by `Ω`.
#[pyfunction]
#[pyo3(signature = (states, samples = 400))]
fn render_svg(states: Vec<PyRef<'_, PyState>>, samples: usize) -> PyResult<String> {
    let files: Vec<StateFile> = states.iter().map(|s| s.file.clone()).collect();
    vstates::render::render_svg(&files, samples).map_err(value_error)
}

#[pymodule]
fn vstates_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoeffs>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyBranch>()?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(critical_radius, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(render_svg, m)?)?;
    Ok(())
}
