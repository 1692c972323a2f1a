//! Python bindings for the `cdvrp` solvers.
//!
//! Solutions cross the boundary as their JSON solution-file text; `to_dict`
//! decodes it with the standard `json` module.

use cdvrp::io::{self, SolutionFile};
use cdvrp::oracle::verify_paths;
use cdvrp::{
    FleetSpec, MetricInstance, Multiplicity, OracleLimits, OracleOutcome, RandomSpec, RoutingSolution, VehicleClass,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

pyo3::create_exception!(cdvrp_py, InfeasibleError, PyValueError, "No feasible solution exists.");

fn to_py(e: cdvrp::Error) -> PyErr {
    if e.is_infeasibility() {
        InfeasibleError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// `(capacity, distance_bound)` or `(capacity, distance_bound, multiplicity)`;
/// a multiplicity of `None` means unbounded.
#[derive(FromPyObject)]
enum ClassSpec {
    Limited((f64, f64, Option<u32>)),
    Plain((f64, f64)),
}

fn fleet_from(classes: Vec<ClassSpec>) -> PyResult<FleetSpec> {
    let classes = classes
        .into_iter()
        .map(|c| match c {
            ClassSpec::Plain((q, t)) => VehicleClass::new(q, t),
            ClassSpec::Limited((q, t, m)) => {
                let mult = m.map_or(Multiplicity::Unbounded, Multiplicity::Limited);
                VehicleClass::new(q, t).with_multiplicity(mult)
            }
        })
        .collect();
    FleetSpec::new(classes).map_err(to_py)
}

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// A metric routing instance; vertex 0 is the depot.
#[pyclass(module = "cdvrp_py", name = "Instance", frozen)]
struct PyInstance {
    inner: MetricInstance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_coords(coords: Vec<(f64, f64)>, demands: Vec<f64>, fleet: Vec<ClassSpec>) -> PyResult<Self> {
        let inner = cdvrp::euclidean_instance(&coords, &demands, fleet_from(fleet)?).map_err(to_py)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (matrix, demands, fleet, name = "instance"))]
    fn from_matrix(matrix: Vec<Vec<f64>>, demands: Vec<f64>, fleet: Vec<ClassSpec>, name: &str) -> PyResult<Self> {
        let inner = MetricInstance::from_matrix(name, matrix, demands, fleet_from(fleet)?).map_err(to_py)?;
        Ok(PyInstance { inner })
    }

    /// Parses the text instance format without validating the metric.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = io::parse_instance_unchecked(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed, fleet, side = 1.0, demand = (1.0, 1.0)))]
    fn random(n: usize, seed: u64, fleet: Vec<ClassSpec>, side: f64, demand: (f64, f64)) -> PyResult<Self> {
        let spec = RandomSpec {
            n,
            seed,
            side,
            demand_range: demand,
            fleet: fleet_from(fleet)?,
        };
        Ok(PyInstance {
            inner: cdvrp::random_instance(&spec).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn demands(&self) -> Vec<f64> {
        self.inner.demands().to_vec()
    }

    #[getter]
    fn fleet(&self) -> Vec<(f64, f64, Option<u32>)> {
        self.inner
            .fleet()
            .classes()
            .iter()
            .map(|c| (c.capacity, c.distance_bound, c.multiplicity.limit()))
            .collect()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius()
    }

    fn dist(&self, i: usize, j: usize) -> PyResult<f64> {
        if i >= self.inner.n() || j >= self.inner.n() {
            return Err(PyValueError::new_err(format!("vertex out of range: ({i}, {j})")));
        }
        Ok(self.inner.dist(i, j))
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    /// Every metric, demand and radius violation, as messages.
    #[pyo3(signature = (eps = cdvrp::EPS))]
    fn validate(&self, eps: f64) -> Vec<String> {
        cdvrp::validate_instance(&self.inner, eps)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    fn to_text(&self) -> String {
        io::write_instance(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(name={:?}, n={}, classes={})",
            self.inner.name(),
            self.inner.n(),
            self.inner.fleet().len()
        )
    }
}

/// A set of r-tours with their vehicle classes.
#[pyclass(module = "cdvrp_py", name = "Solution", frozen)]
struct PySolution {
    inner: RoutingSolution,
    file: SolutionFile,
}

impl PySolution {
    fn new(inner: RoutingSolution, inst: &MetricInstance) -> Self {
        let file = SolutionFile::from_solution(&inner, inst);
        PySolution { inner, file }
    }
}

#[pymethods]
impl PySolution {
    #[getter]
    fn pi(&self) -> usize {
        self.inner.pi
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn algorithm(&self) -> &str {
        &self.inner.meta.algorithm
    }

    /// `(class_id, sequence, length)` per tour.
    #[getter]
    fn tours(&self) -> Vec<(usize, Vec<usize>, f64)> {
        self.inner
            .tours
            .iter()
            .map(|t| (t.class_id, t.tour.seq.clone(), t.tour.length))
            .collect()
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.inner.lengths()
    }

    fn to_json(&self) -> String {
        self.file.to_json()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_loads(py, &self.file.to_json())
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(algorithm={:?}, pi={}, alpha={})",
            self.inner.meta.algorithm, self.inner.pi, self.inner.alpha
        )
    }
}

/// Open paths from the balanced peeling algorithm.
#[pyclass(module = "cdvrp_py", name = "BalancedPaths", frozen)]
struct PyBalancedPaths {
    inner: cdvrp::BalancedPaths,
    file: SolutionFile,
}

#[pymethods]
impl PyBalancedPaths {
    #[getter]
    fn paths(&self) -> Vec<Vec<usize>> {
        self.inner.paths.iter().map(|p| p.seq.clone()).collect()
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.inner.paths.iter().map(|p| p.length).collect()
    }

    #[getter]
    fn repeats(&self) -> Vec<u32> {
        self.inner.repeats.clone()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn peels(&self) -> usize {
        self.inner.peels
    }

    #[getter]
    fn strict(&self) -> bool {
        self.inner.strict
    }

    #[getter]
    fn length_bound(&self) -> f64 {
        self.inner.length_bound
    }

    fn to_json(&self) -> String {
        self.file.to_json()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_loads(py, &self.file.to_json())
    }

    fn __repr__(&self) -> String {
        format!(
            "BalancedPaths(k={}, alpha={}, peels={})",
            self.inner.k, self.inner.alpha, self.inner.peels
        )
    }
}

#[pyfunction]
fn solve_min_nt(inst: &PyInstance) -> PyResult<PySolution> {
    let sol = cdvrp::solve_min_nt(&inst.inner).map_err(to_py)?;
    Ok(PySolution::new(sol, &inst.inner))
}

#[pyfunction]
#[pyo3(signature = (inst, alpha = 0.5))]
fn solve_bdcvrp(inst: &PyInstance, alpha: f64) -> PyResult<PySolution> {
    let sol = cdvrp::solve_bdcvrp(&inst.inner, alpha).map_err(to_py)?;
    Ok(PySolution::new(sol, &inst.inner))
}

/// `lam` defaults to the smallest distance bound of the fleet.
#[pyfunction]
#[pyo3(signature = (inst, lam = None, pad = false))]
fn solve_min_nht(inst: &PyInstance, lam: Option<f64>, pad: bool) -> PyResult<PyBalancedPaths> {
    let lam = lam.unwrap_or_else(|| inst.inner.fleet().t_min());
    let inner = cdvrp::solve_min_nht(&inst.inner, lam, pad).map_err(to_py)?;
    let file = SolutionFile::from_paths(&inner, &inst.inner);
    Ok(PyBalancedPaths { inner, file })
}

/// `(sequence, length)` per tour, ignoring capacities.
#[pyfunction]
fn solve_dvrp(inst: &PyInstance, bound: f64) -> PyResult<Vec<(Vec<usize>, f64)>> {
    let tours = cdvrp::solve_dvrp(&inst.inner, bound).map_err(to_py)?;
    Ok(tours.into_iter().map(|t| (t.seq, t.length)).collect())
}

/// Minimum number of tours by exhaustive search; `None` when infeasible.
#[pyfunction]
#[pyo3(signature = (inst, max_n = OracleLimits::default().max_n))]
fn exact_min_tours(inst: &PyInstance, max_n: usize) -> PyResult<Option<PySolution>> {
    let limits = OracleLimits {
        max_n,
        ..OracleLimits::default()
    };
    Ok(match cdvrp::exact_min_tours(&inst.inner, limits).map_err(to_py)? {
        OracleOutcome::Optimal(sol) => Some(PySolution::new(sol, &inst.inner)),
        OracleOutcome::Infeasible => None,
    })
}

#[pyfunction]
fn exact_tsp(inst: &PyInstance) -> PyResult<(Vec<usize>, f64)> {
    let t = cdvrp::exact_tsp(&inst.inner).map_err(to_py)?;
    Ok((t.seq, t.length))
}

/// Violation messages; an empty list means the solution is feasible.
#[pyfunction]
#[pyo3(signature = (inst, solution, alpha = None))]
fn verify(inst: &PyInstance, solution: &PySolution, alpha: Option<f64>) -> Vec<String> {
    cdvrp::verify_solution(&inst.inner, &solution.inner, alpha)
        .violations
        .iter()
        .map(|v| v.to_string())
        .collect()
}

#[pyfunction]
fn verify_balanced_paths(inst: &PyInstance, paths: &PyBalancedPaths) -> Vec<String> {
    let seqs: Vec<Vec<usize>> = paths.inner.paths.iter().map(|p| p.seq.clone()).collect();
    verify_paths(&inst.inner, &seqs, paths.inner.length_bound)
        .violations
        .iter()
        .map(|v| v.to_string())
        .collect()
}

/// Reads a JSON solution file against `inst`.
#[pyfunction]
fn read_solution(inst: &PyInstance, text: &str) -> PyResult<PySolution> {
    let file = io::read_solution(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let sol = file.to_solution(&inst.inner).map_err(to_py)?;
    Ok(PySolution::new(sol, &inst.inner))
}

#[pyfunction]
fn balance_ratio(lengths: Vec<f64>) -> PyResult<f64> {
    cdvrp::balance_ratio(&lengths).map_err(to_py)
}

/// Pads the solution's tours to equal length; returns the padded instance
/// and the padded solution on it.
#[pyfunction]
fn reduce(inst: &PyInstance, solution: &PySolution, alpha: f64) -> PyResult<(PyInstance, PySolution)> {
    let tours: Vec<_> = solution.inner.tours.iter().map(|t| t.tour.clone()).collect();
    let g = cdvrp::reduce_dcvrp_to_bdcvrp(&inst.inner, &tours, alpha).map_err(to_py)?;
    let padded = PySolution::new(g.padded_solution(), &g.instance);
    Ok((PyInstance { inner: g.instance }, padded))
}

#[pymodule]
fn cdvrp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyBalancedPaths>()?;
    m.add_function(wrap_pyfunction!(solve_min_nt, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bdcvrp, m)?)?;
    m.add_function(wrap_pyfunction!(solve_min_nht, m)?)?;
    m.add_function(wrap_pyfunction!(solve_dvrp, m)?)?;
    m.add_function(wrap_pyfunction!(exact_min_tours, m)?)?;
    m.add_function(wrap_pyfunction!(exact_tsp, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(verify_balanced_paths, m)?)?;
    m.add_function(wrap_pyfunction!(read_solution, m)?)?;
    m.add_function(wrap_pyfunction!(balance_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    Ok(())
}
