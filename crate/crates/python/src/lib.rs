//! Python bindings. Fields cross the boundary as flat row-major lists of
//! floats; results come back as dicts.

use std::path::PathBuf;

use homog_core::cell::{solve_cell as core_solve_cell, tabulate_fhom as core_tabulate, CellProblem};
use homog_core::cli::{load_config, run};
use homog_core::epsproblem::{
    recovery_metrics as core_recovery, solve_eps as core_solve_eps, DeltaSchedule, OscillatingProblem, SeparableTerm,
};
use homog_core::error::Error;
use homog_core::field::{self, PeriodicGrid, ScalarField};
use homog_core::integrand::{CoefficientField, Integrand as CoreIntegrand, Potential};
use homog_core::nfunc::NFunction as CoreNFunction;
use homog_core::solver::SolverSettings;
use homog_core::twoscale::{check_weak_2s as core_check, default_battery, TwoScaleLimit, TwoScaleSettings};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn grid(dim: usize, n: usize, role: &str) -> PyResult<PeriodicGrid> {
    match role {
        "cell" => PeriodicGrid::cell(dim, n),
        "domain" => PeriodicGrid::domain(dim, n),
        other => return Err(PyValueError::new_err(format!("grid role must be 'cell' or 'domain', got {other:?}"))),
    }
    .map_err(err)
}

/// Infers `n` from the value count of a field on a `role` grid.
fn field_from(values: Vec<f64>, dim: usize, role: &str) -> PyResult<ScalarField> {
    let len = values.len() as f64;
    let per_axis = if dim == 1 { len } else { len.sqrt() }.round() as usize;
    let n = if role == "domain" { per_axis.saturating_sub(1) } else { per_axis };
    ScalarField::new(grid(dim, n, role)?, values).map_err(err)
}

fn settings(tol: f64, max_iter: usize) -> SolverSettings {
    SolverSettings {
        tol,
        max_iter,
        ..Default::default()
    }
}

#[pyclass(name = "NFunction", module = "homog", frozen, from_py_object)]
#[derive(Clone)]
struct NFunction {
    inner: CoreNFunction,
}

#[pymethods]
impl NFunction {
    #[staticmethod]
    fn power(p: f64) -> PyResult<Self> {
        Ok(Self { inner: CoreNFunction::power(p).map_err(err)? })
    }

    #[staticmethod]
    fn scaled_power(p: f64, scale: f64) -> PyResult<Self> {
        Ok(Self { inner: CoreNFunction::scaled_power(p, scale).map_err(err)? })
    }

    #[staticmethod]
    fn power_log(p: f64) -> PyResult<Self> {
        Ok(Self { inner: CoreNFunction::power_log(p).map_err(err)? })
    }

    #[staticmethod]
    fn quadratic() -> Self {
        Self { inner: CoreNFunction::quadratic() }
    }

    #[staticmethod]
    fn exponential() -> Self {
        Self { inner: CoreNFunction::exponential() }
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn eval(&self, t: f64) -> PyResult<f64> {
        self.inner.eval(t).map_err(err)
    }

    fn density(&self, t: f64) -> PyResult<f64> {
        self.inner.density(t).map_err(err)
    }

    fn conjugate(&self, t: f64) -> PyResult<f64> {
        self.inner.conjugate(t).map_err(err)
    }

    /// `(B̃(b(t)), t b(t), B(2t))`.
    fn lemma21_check(&self, t: f64) -> PyResult<(f64, f64, f64)> {
        self.inner.lemma21_check(t).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("NFunction({})", self.inner.label())
    }
}

#[pyclass(name = "Integrand", module = "homog", frozen, from_py_object)]
#[derive(Clone)]
struct Integrand {
    inner: CoreIntegrand,
}

#[pymethods]
impl Integrand {
    /// `coefficient` is one of constant, sine, laminate, checkerboard;
    /// `potential` is one of quadratic, power, orlicz.
    #[new]
    #[pyo3(signature = (coefficient, *, a0=1.0, alpha=2.0, beta=1.0, a1=1.0, a2=4.0, axis=0, potential="quadratic", p=2.0, nfunction=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        coefficient: &str,
        a0: f64,
        alpha: f64,
        beta: f64,
        a1: f64,
        a2: f64,
        axis: usize,
        potential: &str,
        p: f64,
        nfunction: Option<NFunction>,
    ) -> PyResult<Self> {
        let c = match coefficient {
            "constant" => CoefficientField::constant(a0),
            "sine" => CoefficientField::sine(alpha, beta),
            "laminate" => CoefficientField::laminate(a1, a2, axis),
            "checkerboard" => CoefficientField::checkerboard(a1, a2),
            other => return Err(PyValueError::new_err(format!("unknown coefficient {other:?}"))),
        }
        .map_err(err)?;
        let w = match (potential, nfunction) {
            ("quadratic", _) => Potential::Quadratic,
            ("power", _) => Potential::power(p).map_err(err)?,
            ("orlicz", Some(nf)) => Potential::orlicz(nf.inner),
            ("orlicz", None) => return Err(PyValueError::new_err("orlicz potential needs nfunction=")),
            (other, _) => return Err(PyValueError::new_err(format!("unknown potential {other:?}"))),
        };
        Ok(Self { inner: CoreIntegrand::new(c, w) })
    }

    fn eval(&self, y: Vec<f64>, xi: Vec<f64>) -> PyResult<f64> {
        check_dims(&y, &xi)?;
        Ok(self.inner.eval(&y, &xi))
    }

    fn grad_xi(&self, y: Vec<f64>, xi: Vec<f64>) -> PyResult<Vec<f64>> {
        check_dims(&y, &xi)?;
        Ok(self.inner.grad_xi(&y, &xi))
    }

    fn __repr__(&self) -> String {
        format!("Integrand({:?}, {:?})", self.inner.coefficient, self.inner.potential)
    }
}

fn check_dims(y: &[f64], xi: &[f64]) -> PyResult<()> {
    if y.len() != xi.len() || !(1..=2).contains(&y.len()) {
        return Err(PyValueError::new_err("y and xi must both have length 1 or 2"));
    }
    Ok(())
}

#[pyfunction]
#[pyo3(signature = (values, nf, dim=1, role="cell"))]
fn luxemburg_norm(values: Vec<f64>, nf: NFunction, dim: usize, role: &str) -> PyResult<f64> {
    field::luxemburg_norm(&field_from(values, dim, role)?, &nf.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (values, nf, dim=1, role="cell"))]
fn modular(values: Vec<f64>, nf: NFunction, dim: usize, role: &str) -> PyResult<f64> {
    Ok(field::modular(&field_from(values, dim, role)?, &nf.inner))
}

#[pyfunction]
#[pyo3(signature = (integrand, xi, n=256, tol=1e-9, max_iter=100_000))]
fn solve_cell<'py>(
    py: Python<'py>,
    integrand: Integrand,
    xi: Vec<f64>,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let p = CellProblem::new(integrand.inner, PeriodicGrid::cell(xi.len(), n).map_err(err)?, &xi)
        .map_err(err)?
        .with_settings(settings(tol, max_iter));
    let s = py.detach(|| core_solve_cell(&p));
    let d = PyDict::new(py);
    d.set_item("value", s.value)?;
    d.set_item("corrector", s.corrector.values().to_vec())?;
    d.set_item("residual", s.gradient_residual)?;
    d.set_item("iterations", s.iterations)?;
    d.set_item("converged", s.converged)?;
    Ok(d)
}

/// `ranges` holds one `(min, max)` per dimension, `counts` the nodes per axis.
#[pyfunction]
#[pyo3(signature = (integrand, ranges, counts, n=256, tol=1e-9, max_iter=100_000))]
fn tabulate_fhom<'py>(
    py: Python<'py>,
    integrand: Integrand,
    ranges: Vec<(f64, f64)>,
    counts: Vec<usize>,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let g = PeriodicGrid::cell(ranges.len(), n).map_err(err)?;
    let table = py
        .detach(|| core_tabulate(&integrand.inner, g, &ranges, &counts, &settings(tol, max_iter)))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("nodes", (0..table.len()).map(|i| table.node(i)).collect::<Vec<_>>())?;
    d.set_item("values", table.values.clone())?;
    d.set_item("converged", table.converged.clone())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (integrand, eps, xi, n=2048, tol=1e-9, max_iter=100_000))]
fn solve_eps<'py>(
    py: Python<'py>,
    integrand: Integrand,
    eps: f64,
    xi: Vec<f64>,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let g = PeriodicGrid::domain(xi.len(), n).map_err(err)?;
    let p = OscillatingProblem::new(integrand.inner, g, eps, &xi)
        .map_err(err)?
        .with_settings(settings(tol, max_iter));
    let s = py.detach(|| core_solve_eps(&p));
    let d = PyDict::new(py);
    d.set_item("epsilon", s.epsilon)?;
    d.set_item("energy", s.energy)?;
    d.set_item("minimizer", s.minimizer.values().to_vec())?;
    d.set_item("residual", s.residual)?;
    d.set_item("iterations", s.iterations)?;
    d.set_item("converged", s.converged)?;
    Ok(d)
}

/// Recovery field for affine `u = ξ·x` with the optimal cell corrector as
/// the micro profile; norms use `t^p`.
#[pyfunction]
#[pyo3(signature = (integrand, eps, xi, n=2048, n_y=256, delta_factor=1.0, delta_exponent=0.5, p=2.0))]
#[allow(clippy::too_many_arguments)]
fn recovery_metrics<'py>(
    py: Python<'py>,
    integrand: Integrand,
    eps: f64,
    xi: Vec<f64>,
    n: usize,
    n_y: usize,
    delta_factor: f64,
    delta_exponent: f64,
    p: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let dim = xi.len();
    let nf = CoreNFunction::power(p).map_err(err)?;
    let cell = CellProblem::new(integrand.inner.clone(), PeriodicGrid::cell(dim, n_y).map_err(err)?, &xi).map_err(err)?;
    let g = PeriodicGrid::domain(dim, n).map_err(err)?;
    let schedule = DeltaSchedule {
        factor: delta_factor,
        exponent: delta_exponent,
    };
    let m = py
        .detach(|| {
            let sol = core_solve_cell(&cell);
            if !sol.converged {
                return Err(Error::Domain("cell corrector did not converge".into()));
            }
            let u = ScalarField::from_fn(g, |x| x.iter().zip(&xi).map(|(a, b)| a * b).sum());
            let term = SeparableTerm::new(ScalarField::constant(g, 1.0), sol.corrector)?;
            core_recovery(&integrand.inner, &u, &[term], eps, &schedule, &nf)
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("epsilon", m.epsilon)?;
    d.set_item("delta", m.delta)?;
    d.set_item("term1", m.term1)?;
    d.set_item("term1_sobolev", m.term1_sobolev)?;
    d.set_item("term2_plus", m.term2_plus)?;
    d.set_item("term2_minus", m.term2_minus)?;
    d.set_item("c_delta_eps", m.c_delta_eps)?;
    d.set_item("c_delta_eps_literal", m.c_delta_eps_literal)?;
    d.set_item("energy_of_recovery", m.energy_of_recovery)?;
    d.set_item("target_two_scale_energy", m.target_two_scale_energy)?;
    Ok(d)
}

/// Checks nodal fields `fields[k]` (domain grids) at `eps[k]` against the
/// limit `u₀(x, y) = profile(y)`, or against zero when `profile` is None.
/// `profile` holds values on a cell-Y grid.
#[pyfunction]
#[pyo3(signature = (eps, fields, dim=1, profile=None))]
fn check_weak_2s<'py>(
    py: Python<'py>,
    eps: Vec<f64>,
    fields: Vec<Vec<f64>>,
    dim: usize,
    profile: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    if eps.len() != fields.len() || eps.is_empty() {
        return Err(PyValueError::new_err("need one field per epsilon"));
    }
    let sequence = eps
        .into_iter()
        .zip(fields)
        .map(|(e, v)| field_from(v, dim, "domain").map(|f| (e, f)))
        .collect::<PyResult<Vec<_>>>()?;
    let u0 = match profile {
        Some(v) => {
            let macro_grid = *sequence[0].1.grid();
            TwoScaleLimit::zero()
                .with_term(ScalarField::constant(macro_grid, 1.0), field_from(v, dim, "cell")?, false)
                .map_err(err)?
        }
        None => TwoScaleLimit::zero(),
    };
    let r = py
        .detach(|| core_check(&sequence, &u0, &default_battery(dim), &TwoScaleSettings::default()))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("passed", r.passed)?;
    d.set_item("ordered", r.ordered)?;
    d.set_item("terminal_defect", r.terminal_defect())?;
    let tests = PyDict::new(py);
    for t in &r.tests {
        let e = PyDict::new(py);
        e.set_item("target", t.target)?;
        e.set_item("pairings", t.pairings.clone())?;
        e.set_item("defects", t.defects.clone())?;
        e.set_item("slope", t.slope)?;
        e.set_item("passed", t.passed)?;
        tests.set_item(&t.id, e)?;
    }
    d.set_item("tests", tests)?;
    Ok(d)
}

/// Runs a scenario from a TOML config; returns `(exit_code, report)`.
#[pyfunction]
fn run_config(py: Python<'_>, config: PathBuf, out_dir: PathBuf) -> PyResult<(i32, String)> {
    let cfg = load_config(&config).map_err(err)?;
    let report = py.detach(|| run(&cfg, &out_dir)).map_err(err)?;
    Ok((report.exit_code(), report.render()))
}

#[pymodule]
fn homog(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<NFunction>()?;
    m.add_class::<Integrand>()?;
    m.add_function(wrap_pyfunction!(luxemburg_norm, m)?)?;
    m.add_function(wrap_pyfunction!(modular, m)?)?;
    m.add_function(wrap_pyfunction!(solve_cell, m)?)?;
    m.add_function(wrap_pyfunction!(tabulate_fhom, m)?)?;
    m.add_function(wrap_pyfunction!(solve_eps, m)?)?;
    m.add_function(wrap_pyfunction!(recovery_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(check_weak_2s, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
