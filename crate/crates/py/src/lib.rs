use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use qtd_core::emission::{self, LineGeometry};
use qtd_core::scenarios::{self, ConfigOverrides, ScenarioConfig};
use qtd_core::selftest::{run_selftest, SelftestOptions};
use qtd_core::{dilation, wavepackets, Error, FreeDim, GammaCForm, Objective, OptimizeRequest};

fn to_py(e: Error) -> PyErr {
    if e.is_numeric() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn ser<T: serde::Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("value serializes")
}

/// Two Gaussian momentum packets with mixing angle, relative phase, centres
/// and common spread, all momenta in units of m c.
#[pyclass(name = "PacketPairSpec", from_py_object)]
#[derive(Clone)]
struct PyPacketPairSpec(wavepackets::PacketPairSpec);

#[pymethods]
impl PyPacketPairSpec {
    #[new]
    fn new(theta: f64, phi: f64, u1: f64, u2: f64, delta: f64) -> PyResult<Self> {
        wavepackets::PacketPairSpec::new(theta, phi, u1, u2, delta)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta
    }
    #[getter]
    fn phi(&self) -> f64 {
        self.0.phi
    }
    #[getter]
    fn u1(&self) -> f64 {
        self.0.u1
    }
    #[getter]
    fn u2(&self) -> f64 {
        self.0.u2
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    fn gamma_q_inv(&self) -> PyResult<f64> {
        dilation::gamma_q_inv(&self.0).map_err(to_py)
    }

    fn delta_q(&self) -> PyResult<f64> {
        dilation::delta_q(&self.0).map_err(to_py)
    }

    /// `form` is "printed" or "second_moment".
    #[pyo3(signature = (form = "printed"))]
    fn gamma_c_inv(&self, form: &str) -> PyResult<f64> {
        let form = match form {
            "printed" => GammaCForm::Printed,
            "second_moment" => GammaCForm::SecondMoment,
            other => return Err(PyValueError::new_err(format!("unknown form '{other}'"))),
        };
        dilation::gamma_c_inv(&self.0, form).map_err(to_py)
    }

    fn dilation_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = dilation::dilation_report(&self.0).map_err(to_py)?;
        json_to_py(py, &ser(&r))
    }

    fn density_superposition(&self, u: f64) -> PyResult<f64> {
        wavepackets::density_superposition(u, &self.0).map_err(to_py)
    }

    fn density_mixture(&self, u: f64) -> PyResult<f64> {
        wavepackets::density_mixture(u, &self.0).map_err(to_py)
    }

    /// Closed-form `(K1, K2)`.
    fn moment_diff(&self) -> PyResult<(f64, f64)> {
        let m = wavepackets::moment_diff_closed(&self.0).map_err(to_py)?;
        Ok((m.k1, m.k2))
    }

    /// `K_j` by adaptive quadrature of the density difference.
    fn moment_diff_quadrature(&self, j: u32) -> PyResult<f64> {
        wavepackets::moment_diff_quadrature(
            &wavepackets::MotionalState::Superposition(self.0),
            &wavepackets::MotionalState::Mixture(self.0),
            j,
        )
        .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let s = &self.0;
        format!(
            "PacketPairSpec(theta={}, phi={}, u1={}, u2={}, delta={})",
            s.theta, s.phi, s.u1, s.u2, s.delta
        )
    }
}

#[pyclass(name = "AtomSpec", from_py_object)]
#[derive(Clone)]
struct PyAtomSpec(emission::AtomSpec);

#[pymethods]
impl PyAtomSpec {
    #[new]
    #[pyo3(signature = (epsilon = 0.0, line_ratio = 1.5e9))]
    fn new(epsilon: f64, line_ratio: f64) -> PyResult<Self> {
        emission::AtomSpec::new(epsilon, line_ratio).map(Self).map_err(to_py)
    }
    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }
    #[getter]
    fn line_ratio(&self) -> f64 {
        self.0.line_ratio
    }
}

/// Centre-of-mass state: a coherent pair, a mixed pair, a sharp momentum or
/// a sampled amplitude.
#[pyclass(name = "MotionalState", from_py_object)]
#[derive(Clone)]
struct PyMotionalState(wavepackets::MotionalState);

#[pymethods]
impl PyMotionalState {
    #[staticmethod]
    fn superposition(spec: PyPacketPairSpec) -> Self {
        Self(wavepackets::MotionalState::Superposition(spec.0))
    }
    #[staticmethod]
    fn mixture(spec: PyPacketPairSpec) -> Self {
        Self(wavepackets::MotionalState::Mixture(spec.0))
    }
    #[staticmethod]
    fn eigenstate(u: f64) -> Self {
        Self(wavepackets::MotionalState::Eigenstate(u))
    }
    /// Amplitudes `re + i im` on `grid`, rescaled to unit norm.
    #[staticmethod]
    #[pyo3(signature = (grid, re, im = None))]
    fn sampled(grid: Vec<f64>, re: Vec<f64>, im: Option<Vec<f64>>) -> PyResult<Self> {
        let im = im.unwrap_or_else(|| vec![0.0; re.len()]);
        if im.len() != re.len() {
            return Err(PyValueError::new_err("re and im must have equal length"));
        }
        let amps = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let p = wavepackets::SampledPacket::normalized(grid, amps).map_err(to_py)?;
        Ok(Self(wavepackets::MotionalState::SampledPacket(p)))
    }

    fn moment(&self, j: u32) -> PyResult<f64> {
        self.0.moment(j).map_err(to_py)
    }

    fn rate_total(&self, atom: PyAtomSpec) -> PyResult<f64> {
        emission::rate_total(&self.0, &atom.0).map_err(to_py)
    }

    fn angular_rate(&self, big_theta: f64, big_phi: f64, atom: PyAtomSpec) -> PyResult<f64> {
        emission::angular_rate(big_theta, big_phi, &self.0, &atom.0).map_err(to_py)
    }

    fn line_parallel(&self, omega_over_omega: f64, atom: PyAtomSpec) -> PyResult<f64> {
        emission::line_parallel(omega_over_omega, &self.0, &atom.0).map_err(to_py)
    }

    fn line_perpendicular(&self, omega_over_omega: f64, atom: PyAtomSpec) -> PyResult<f64> {
        emission::line_perpendicular(omega_over_omega, &self.0, &atom.0).map_err(to_py)
    }

    /// Line shape per unit detuning `(ω - Ω)/Γ0`; geometry "parallel" or "perpendicular".
    fn line_detuning(&self, geometry: &str, detuning: f64, atom: PyAtomSpec) -> PyResult<f64> {
        let g = match geometry {
            "parallel" => LineGeometry::Parallel,
            "perpendicular" => LineGeometry::Perpendicular,
            other => return Err(PyValueError::new_err(format!("unknown geometry '{other}'"))),
        };
        emission::line_detuning(g, detuning, &self.0, &atom.0).map_err(to_py)
    }

    fn survival_probability(&self, t: f64, atom: PyAtomSpec) -> PyResult<f64> {
        emission::survival_probability(t, &self.0, &atom.0).map_err(to_py)
    }
}

#[pyfunction]
fn lambert_w0(x: f64) -> PyResult<f64> {
    dilation::lambert_w0(x).map_err(to_py)
}

/// Analytic extrema over θ at φ = π, maximum first.
#[pyfunction]
fn extrema_phi_pi<'py>(py: Python<'py>, spec: PyPacketPairSpec) -> PyResult<Bound<'py, PyAny>> {
    let e = dilation::extrema_phi_pi(&spec.0).map_err(to_py)?;
    json_to_py(py, &ser(&e))
}

/// Numerical extremum over `free` ⊆ {"theta", "phi", "separation"}.
#[pyfunction]
#[pyo3(signature = (spec, free, objective = "maximize"))]
fn optimize_gamma_q<'py>(py: Python<'py>, spec: PyPacketPairSpec, free: Vec<String>, objective: &str) -> PyResult<Bound<'py, PyAny>> {
    let free = free
        .iter()
        .map(|f| match f.as_str() {
            "theta" => Ok(FreeDim::Theta),
            "phi" => Ok(FreeDim::Phi),
            "separation" => Ok(FreeDim::Separation),
            other => Err(PyValueError::new_err(format!("unknown dimension '{other}'"))),
        })
        .collect::<PyResult<Vec<_>>>()?;
    let objective = match objective {
        "maximize" => Objective::Maximize,
        "minimize" => Objective::Minimize,
        other => return Err(PyValueError::new_err(format!("unknown objective '{other}'"))),
    };
    let r = dilation::optimize_gamma_q(&OptimizeRequest::new(spec.0, free, objective)).map_err(to_py)?;
    json_to_py(py, &ser(&r))
}

/// Runs a named scenario with optional overrides (a JSON object string) and
/// writes its files to `out`. Returns the summary.
#[pyfunction]
#[pyo3(signature = (name, out, overrides = None))]
fn run_scenario<'py>(py: Python<'py>, name: &str, out: &str, overrides: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let mut o = match overrides {
        Some(text) => ConfigOverrides::from_json(text).map_err(to_py)?,
        None => ConfigOverrides::default(),
    };
    o.scenario = Some(name.to_string());
    let cfg = ScenarioConfig::resolve(&o).map_err(to_py)?;
    let run = py.detach(|| scenarios::run(&cfg)).map_err(to_py)?;
    let paths = scenarios::write_run(std::path::Path::new(out), &run, &cfg).map_err(to_py)?;
    let files: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    json_to_py(py, &serde_json::json!({"files": files, "summary": run.summary}))
}

#[pyfunction]
#[pyo3(signature = (perturb = 0.0, cases = 50))]
fn selftest<'py>(py: Python<'py>, perturb: f64, cases: usize) -> PyResult<Bound<'py, PyAny>> {
    let opts = SelftestOptions {
        perturb,
        cases,
        ..Default::default()
    };
    let report = py.detach(|| run_selftest(&opts));
    json_to_py(py, &ser(&report))
}

#[pymodule]
fn qtd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", qtd_core::VERSION)?;
    m.add_class::<PyPacketPairSpec>()?;
    m.add_class::<PyAtomSpec>()?;
    m.add_class::<PyMotionalState>()?;
    m.add_function(wrap_pyfunction!(lambert_w0, m)?)?;
    m.add_function(wrap_pyfunction!(extrema_phi_pi, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_gamma_q, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
