//! Python extension module for the barrier calculus.
//!
//! Exposes the library at the same granularity as the command-line
//! interface: problem intake from the shared JSON schema, barrier
//! evaluation and local geometry, sampling-based certification,
//! path-following solves, the step-size laws, and the polarity map.
//!
//! Vectors cross the boundary as plain Python lists of floats and
//! matrices as lists of rows, so no array package is required on the
//! Python side.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use projbar::duality;
use projbar::ipm::{self, DecrementModel, SolveMethod};
use projbar::problem::{build_barrier, build_instance, parse_barrier, parse_problem};
use projbar::verify;
use projbar::{local_geometry, Barrier as BarrierOps, BarrierSet, Error};

/// Domain and construction errors become `ValueError`; numerical
/// breakdowns inside iterative procedures become `RuntimeError`.
fn py_err(e: Error) -> PyErr {
    match e {
        Error::DegenerateMetric | Error::NoConvergence { .. } | Error::NoRealStep => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vector(data: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(data)
}

fn to_list(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Scalar data of a barrier restricted to a line, as returned by
/// [`Barrier::local_geometry`].
#[pyclass(frozen, get_all)]
struct LocalGeometry {
    /// First directional derivative `f'(x)[h]`.
    p0: f64,
    /// Second directional derivative `f''(x)[h,h]`.
    s0: f64,
    /// Metric length `sqrt(s0 - p0^2)` of the direction.
    g0: f64,
    /// Corrected cubic form `C(x)[h,h,h]`.
    c3: f64,
}

/// Result of a path-following solve.
///
/// `trace` lists one row per iteration as a tuple
/// `(iter, obj, decrement, step_dist, tau_hat, gap)`, matching the
/// columns of the CLI trace file.
#[pyclass(frozen, get_all)]
struct Solution {
    x: Vec<f64>,
    objective: f64,
    gap_bound: f64,
    iterations: usize,
    trace: Vec<(usize, f64, f64, f64, f64, f64)>,
}

/// A barrier together with the convex set it lives on.
#[pyclass(frozen, name = "Barrier")]
struct PyBarrier {
    set: Arc<dyn BarrierSet>,
    interior: Option<DVector<f64>>,
}

impl PyBarrier {
    fn ops(&self) -> &dyn BarrierOps {
        self.set.as_ref()
    }

    /// Resolves the start point for procedures that need one.
    fn anchor(&self, start: Option<Vec<f64>>) -> PyResult<DVector<f64>> {
        match start {
            Some(v) => Ok(vector(&v)),
            None => self.interior.clone().ok_or_else(|| {
                PyValueError::new_err(
                    "no interior point is known for this barrier; pass start=[...]",
                )
            }),
        }
    }
}

#[pymethods]
impl PyBarrier {
    /// Builds a barrier from a JSON description, the value of the
    /// `barrier` field of a problem file.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = parse_barrier(text).map_err(parse_err)?;
        let (set, interior) = build_barrier(&spec).map_err(py_err)?;
        Ok(Self { set, interior })
    }

    /// Ambient dimension of the domain.
    #[getter]
    fn dim(&self) -> usize {
        self.ops().dim()
    }

    /// Declared projective self-concordance constant.
    #[getter]
    fn gamma(&self) -> f64 {
        self.ops().params().gamma
    }

    /// Declared affine barrier parameter.
    #[getter]
    fn nu(&self) -> f64 {
        self.ops().params().nu
    }

    /// Barrier value at an interior point.
    fn value(&self, x: Vec<f64>) -> PyResult<f64> {
        Ok(self.ops().eval(&vector(&x)).map_err(py_err)?.value)
    }

    /// Gradient at an interior point.
    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(to_list(&self.ops().eval(&vector(&x)).map_err(py_err)?.grad))
    }

    /// Hessian at an interior point, as a list of rows.
    fn hessian(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(to_rows(&self.ops().eval(&vector(&x)).map_err(py_err)?.hess))
    }

    /// Directional third derivative `f'''(x)[h,h,h]`.
    fn third_directional(&self, x: Vec<f64>, h: Vec<f64>) -> PyResult<f64> {
        self.ops()
            .third_directional(&vector(&x), &vector(&h))
            .map_err(py_err)
    }

    /// Directional derivatives and the corrected cubic form along `h`.
    fn local_geometry(&self, x: Vec<f64>, h: Vec<f64>) -> PyResult<LocalGeometry> {
        let lg = local_geometry(self.ops(), &vector(&x), &vector(&h)).map_err(py_err)?;
        Ok(LocalGeometry { p0: lg.p0, s0: lg.s0, g0: lg.g0, c3: lg.c3 })
    }

    /// Whether `x` lies in the closed set, up to a relative slack.
    #[pyo3(signature = (x, tol = 1e-9))]
    fn contains(&self, x: Vec<f64>, tol: f64) -> bool {
        self.set.contains(&vector(&x), tol)
    }

    /// Reciprocal distance to the boundary along `h` from `x`; zero
    /// means the ray never leaves the set.
    fn sigma(&self, x: Vec<f64>, h: Vec<f64>) -> PyResult<f64> {
        self.set.sigma(&vector(&x), &vector(&h)).map_err(py_err)
    }

    /// Minimizer of the barrier, found by Newton descent from `start`.
    #[pyo3(signature = (start = None))]
    fn analytic_center(&self, start: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
        let x0 = self.anchor(start)?;
        Ok(to_list(&ipm::analytic_center(self.ops(), &x0).map_err(py_err)?))
    }

    /// Sampling estimate of the self-concordance constant; a lower
    /// bound that is deterministic in the seed.
    #[pyo3(signature = (samples = 500, seed = 7, start = None))]
    fn estimate_gamma(&self, samples: usize, seed: u64, start: Option<Vec<f64>>) -> PyResult<f64> {
        let x0 = self.anchor(start)?;
        verify::estimate_gamma(self.set.as_ref(), &x0, samples, seed).map_err(py_err)
    }

    /// Image of an interior point under the polarity map.
    fn dual_point(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(to_list(&duality::dual_point(self.ops(), &vector(&x)).map_err(py_err)?))
    }

    /// Dual barrier value at `p` with the inner minimizer, as a pair
    /// `(value, minimizer)`.
    #[pyo3(signature = (p, start = None))]
    fn dual_value(&self, p: Vec<f64>, start: Option<Vec<f64>>) -> PyResult<(f64, Vec<f64>)> {
        let x0 = self.anchor(start)?;
        let dv = duality::dual_value(self.ops(), &vector(&p), &x0).map_err(py_err)?;
        Ok((dv.value, to_list(&dv.minimizer)))
    }
}

/// A linear objective over a barrier domain, ready to solve.
#[pyclass(frozen)]
struct Problem {
    set: Arc<dyn BarrierSet>,
    objective: DVector<f64>,
    start: DVector<f64>,
}

#[pymethods]
impl Problem {
    /// Builds a problem from the JSON schema shared with the CLI:
    /// `{"barrier": {...}, "objective": [...], "x0": [...]}` with `x0`
    /// optional when the barrier has a canonical interior point.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = parse_problem(text).map_err(parse_err)?;
        let inst = build_instance(&file).map_err(py_err)?;
        Ok(Self { set: inst.set, objective: inst.objective, start: inst.start })
    }

    /// The barrier of the feasible set, anchored at the start point.
    #[getter]
    fn barrier(&self) -> PyBarrier {
        PyBarrier { set: self.set.clone(), interior: Some(self.start.clone()) }
    }

    #[getter]
    fn objective(&self) -> Vec<f64> {
        to_list(&self.objective)
    }

    #[getter]
    fn start(&self) -> Vec<f64> {
        to_list(&self.start)
    }

    /// Runs the path-following solver; `method` is `"affine"` or
    /// `"projective"`.
    #[pyo3(signature = (method = "affine", eps = 1e-6))]
    fn solve(&self, method: &str, eps: f64) -> PyResult<Solution> {
        let method = match method {
            "affine" => SolveMethod::Affine,
            "projective" => SolveMethod::Projective,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown method {other:?}; expected \"affine\" or \"projective\""
                )))
            }
        };
        let b: &dyn BarrierOps = self.set.as_ref();
        let trace = ipm::solve(b, &self.objective, &self.start, method, eps).map_err(py_err)?;
        let rows = trace
            .records
            .iter()
            .map(|r| (r.iter, r.objective, r.decrement, r.step_distance, r.tau_estimate, r.gap_bound))
            .collect();
        Ok(Solution {
            x: to_list(&trace.x),
            objective: trace.objective,
            gap_bound: trace.gap_bound,
            iterations: trace.iterations,
            trace: rows,
        })
    }
}

/// Affine barrier parameter equivalent to the projective constant.
#[pyfunction]
fn nu_from_gamma(gamma: f64) -> PyResult<f64> {
    projbar::nu_from_gamma(gamma).map_err(py_err)
}

/// Projective self-concordance constant of an affine parameter.
#[pyfunction]
fn gamma_from_nu(nu: f64) -> PyResult<f64> {
    projbar::gamma_from_nu(nu).map_err(py_err)
}

/// Largest admissible step and the guaranteed decrement for one
/// projective step at the given constant, as `(lambda_star, lambda_low)`.
#[pyfunction]
fn step_limits(gamma: f64) -> PyResult<(f64, f64)> {
    ipm::optimal_lambda(DecrementModel::Projective(gamma)).map_err(py_err)
}

/// The step-size pair of the affine reference model.
#[pyfunction]
fn affine_step_limits() -> PyResult<(f64, f64)> {
    ipm::optimal_lambda(DecrementModel::Affine).map_err(py_err)
}

#[pymodule]
fn projbar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBarrier>()?;
    m.add_class::<Problem>()?;
    m.add_class::<Solution>()?;
    m.add_class::<LocalGeometry>()?;
    m.add_function(wrap_pyfunction!(nu_from_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_from_nu, m)?)?;
    m.add_function(wrap_pyfunction!(step_limits, m)?)?;
    m.add_function(wrap_pyfunction!(affine_step_limits, m)?)?;
    Ok(())
}
