//! Python bindings: `import gravchan`.

use gravchan_core as core;
use gravchan_core::interferometer::{GravityModel, PulseTiming};
use gravchan_core::noise::{self, NoiseParams, ShotNoiseModel};
use gravchan_core::{BasisVector, Complex64, MomentumIndex, SpinLabel};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::Multimodal | core::Error::UncoveredBasisVector(_) | core::Error::InvalidOperator(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_spins(spins: &str) -> PyResult<Vec<SpinLabel>> {
    spins
        .chars()
        .map(|c| match c {
            'g' => Ok(SpinLabel::G),
            'e' => Ok(SpinLabel::E),
            other => Err(PyValueError::new_err(format!("spin must be 'g' or 'e', got {other:?}"))),
        })
        .collect()
}

#[pyclass(name = "ChannelSpec", module = "gravchan", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChannelSpec(core::ChannelSpec);

#[pymethods]
impl PyChannelSpec {
    #[staticmethod]
    fn bell() -> Self {
        Self(core::ChannelSpec::Bell)
    }

    /// `a|g⟩₀|e⟩₁ + b|e⟩₀|g⟩₁`; requires |a|² + |b|² = 1.
    #[staticmethod]
    fn general(a: Complex64, b: Complex64) -> PyResult<Self> {
        let spec = core::ChannelSpec::General { a, b };
        spec.validate().map_err(err)?;
        Ok(Self(spec))
    }

    #[staticmethod]
    fn cat(atoms: usize) -> PyResult<Self> {
        let spec = core::ChannelSpec::Cat { atoms };
        spec.validate().map_err(err)?;
        Ok(Self(spec))
    }

    #[staticmethod]
    fn classical_mixture() -> Self {
        Self(core::ChannelSpec::ClassicalMixture)
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.0.n_atoms()
    }

    #[getter]
    fn remote_ground_weight(&self) -> f64 {
        self.0.remote_ground_weight()
    }

    fn __repr__(&self) -> String {
        format!("ChannelSpec({:?})", self.0)
    }
}

#[pyclass(name = "InterferometerParams", module = "gravchan", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams(core::InterferometerParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (k=1.61e7, t=0.1, g0=9.8, gradient_per_m=3e-7, phases=(0.0, 0.0, 0.0), gradient_correction=false))]
    fn new(
        k: f64,
        t: f64,
        g0: f64,
        gradient_per_m: f64,
        phases: (f64, f64, f64),
        gradient_correction: bool,
    ) -> PyResult<Self> {
        let timing = PulseTiming::new(t, k).map_err(err)?;
        let gravity = GravityModel::from_fractional_gradient(g0, gradient_per_m).map_err(err)?;
        let phases = core::LaserPhases::new(phases.0, phases.1, phases.2);
        Ok(Self(core::InterferometerParams::new(timing, gravity, phases, gradient_correction)))
    }

    /// Total phase implied by (k, T, g).
    fn delta_phi(&self) -> f64 {
        self.0.delta_phi()
    }

    #[getter]
    fn phases(&self) -> (f64, f64, f64) {
        let p = self.0.phases;
        (p.phi1, p.phi2, p.phi3)
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "InterferometerParams(k={}, t={}, g0={}, gamma={}, phases={:?}, gradient_correction={})",
            p.timing.k,
            p.timing.t,
            p.gravity.g0,
            p.gravity.gamma,
            self.phases(),
            p.gradient_correction
        )
    }
}

fn params_or_default(params: Option<&PyParams>) -> core::InterferometerParams {
    params.map(|p| p.0).unwrap_or_default()
}

/// Sparse state; keys are labels such as `"ge;+0"` (spins, then the probe's momentum index).
#[pyclass(name = "PureState", module = "gravchan", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPureState(core::PureState);

#[pymethods]
impl PyPureState {
    #[staticmethod]
    #[pyo3(signature = (spins, momentum=0))]
    fn basis(spins: &str, momentum: i32) -> PyResult<Self> {
        let spins = parse_spins(spins)?;
        if spins.is_empty() {
            return Err(PyValueError::new_err("at least one atom is required"));
        }
        Ok(Self(core::PureState::basis(BasisVector::new(spins, MomentumIndex(momentum)))))
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.0.n_atoms()
    }

    fn amplitudes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, a) in self.0.iter() {
            d.set_item(k.label(), *a)?;
        }
        Ok(d)
    }

    fn norm(&self) -> f64 {
        self.0.norm_sqr().sqrt()
    }

    fn fidelity(&self, other: &PyPureState) -> PyResult<f64> {
        self.0.fidelity(&other.0).map_err(err)
    }

    /// `(P(g), P(e))` for one atom.
    fn measure_spin(&self, atom: usize) -> PyResult<(f64, f64)> {
        let d = self.0.measure_spin(atom).map_err(err)?;
        Ok((d.g, d.e))
    }

    fn __repr__(&self) -> String {
        let terms: Vec<String> = self.0.iter().map(|(k, a)| format!("({}{:+}i){k}", a.re, a.im)).collect();
        format!("PureState({})", terms.join(" + "))
    }
}

#[pyclass(name = "TransferOutcome", module = "gravchan", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTransferOutcome(core::TransferOutcome);

#[pymethods]
impl PyTransferOutcome {
    #[getter]
    fn p_select(&self) -> f64 {
        self.0.p_select
    }
    #[getter]
    fn p_joint_g(&self) -> f64 {
        self.0.p_joint_g
    }
    #[getter]
    fn p_joint_e(&self) -> f64 {
        self.0.p_joint_e
    }
    #[getter]
    fn p_closed_form(&self) -> f64 {
        self.0.p_closed_form
    }
    #[getter]
    fn delta_phi_used(&self) -> f64 {
        self.0.delta_phi_used
    }
    /// Remote `g` probability given successful selection; `None` if selection never succeeds.
    fn conditional_g(&self) -> Option<f64> {
        self.0.conditional_g()
    }

    fn __repr__(&self) -> String {
        let o = &self.0;
        format!(
            "TransferOutcome(delta_phi={}, p_select={}, p_joint_g={}, p_joint_e={}, p_closed_form={})",
            o.delta_phi_used, o.p_select, o.p_joint_g, o.p_joint_e, o.p_closed_form
        )
    }
}

/// Pure channels give a `PureState`; the classical mixture gives `[(weight, PureState), ...]`.
#[pyfunction]
fn make_channel(py: Python<'_>, spec: &PyChannelSpec) -> PyResult<Py<PyAny>> {
    match core::make_channel(&spec.0).map_err(err)? {
        core::Channel::Pure(s) => Ok(Py::new(py, PyPureState(s))?.into_any()),
        core::Channel::Mixed(e) => {
            let members: Vec<(f64, PyPureState)> =
                e.members().iter().map(|(w, s)| (*w, PyPureState(s.clone()))).collect();
            Ok(members.into_pyobject(py)?.into_any().unbind())
        }
    }
}

#[pyfunction]
fn prepare_bell() -> PyResult<PyPureState> {
    core::prepare_bell().map(PyPureState).map_err(err)
}

/// Runs both cavity transits; returns `(state, cavity_residual)`.
#[pyfunction]
#[pyo3(signature = (omega_t1=std::f64::consts::FRAC_PI_2, omega_t2=std::f64::consts::PI))]
fn prepare_pair(omega_t1: f64, omega_t2: f64) -> PyResult<(PyPureState, f64)> {
    let p =
        core::channel::prepare_pair(core::channel::CavityPreparation { omega_t1, omega_t2 }).map_err(err)?;
    Ok((PyPureState(p.state), p.cavity_residual))
}

/// `(a1, a2, b1, b2)` of the full pulse sequence.
#[pyfunction]
fn composite_coefficients(
    phi1: f64,
    phi2: f64,
    phi3: f64,
    delta_phi: f64,
) -> (Complex64, Complex64, Complex64, Complex64) {
    let c = core::interferometer::composite_coefficients(core::LaserPhases::new(phi1, phi2, phi3), delta_phi);
    (c.a1, c.a2, c.b1, c.b2)
}

#[pyfunction]
#[pyo3(signature = (state, params=None, delta_phi=None))]
fn apply_composite(
    state: &PyPureState,
    params: Option<&PyParams>,
    delta_phi: Option<f64>,
) -> PyResult<PyPureState> {
    core::interferometer::apply_composite(&state.0, &params_or_default(params), delta_phi)
        .map(PyPureState)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (state, params=None, delta_phi=None))]
fn run_pulse_sequence(
    state: &PyPureState,
    params: Option<&PyParams>,
    delta_phi: Option<f64>,
) -> PyResult<PyPureState> {
    core::interferometer::run_pulse_sequence(&state.0, &params_or_default(params), delta_phi)
        .map(PyPureState)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (spec, params=None, remote_atom=0, delta_phi=None))]
fn run_transfer(
    spec: &PyChannelSpec,
    params: Option<&PyParams>,
    remote_atom: usize,
    delta_phi: Option<f64>,
) -> PyResult<PyTransferOutcome> {
    core::run_transfer(&spec.0, &params_or_default(params), remote_atom, delta_phi)
        .map(PyTransferOutcome)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (spec, grid, params=None, remote_atom=0))]
fn fringe_scan(
    py: Python<'_>,
    spec: &PyChannelSpec,
    grid: Vec<f64>,
    params: Option<&PyParams>,
    remote_atom: usize,
) -> PyResult<Vec<PyTransferOutcome>> {
    let params = params_or_default(params);
    let spec = spec.0;
    let points =
        py.detach(|| core::protocol::fringe_scan(&spec, &params, remote_atom, &grid)).map_err(err)?;
    Ok(points.into_iter().map(|p| PyTransferOutcome(p.outcome)).collect())
}

#[pyfunction]
#[pyo3(signature = (params=None, delta_phi=None))]
fn direct_measurement(params: Option<&PyParams>, delta_phi: Option<f64>) -> PyResult<f64> {
    core::protocol::direct_measurement(&params_or_default(params), delta_phi).map_err(err)
}

/// Inverts `p = w(1 + cos Δφ)/2` onto [0, π].
#[pyfunction]
fn estimate_phase(p_observed: f64, remote_ground_weight: f64) -> PyResult<f64> {
    core::protocol::estimate_phase(p_observed, remote_ground_weight).map_err(err)
}

#[pyfunction]
fn shot_noise_closed_form(n_atoms: u64, with_channel: bool) -> f64 {
    noise::shot_noise_closed_form(n_atoms, with_channel)
}

/// Phase-noise ratio for `a_abs=None` (Bell) or a general channel with |a| = `a_abs`.
#[pyfunction]
#[pyo3(signature = (a_abs=None))]
fn phase_noise_ratio(a_abs: Option<f64>) -> f64 {
    noise::phase_noise_ratio(match a_abs {
        None => noise::PhaseNoiseChannel::Bell,
        Some(a_abs) => noise::PhaseNoiseChannel::General { a_abs },
    })
}

fn estimate_dict<'py>(py: Python<'py>, e: noise::McEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("estimate", e.estimate)?;
    d.set_item("std_error", e.std_error)?;
    d.set_item("n_runs", e.n_runs)?;
    Ok(d)
}

/// Closed-form and Monte Carlo noise comparison for the Bell channel.
#[pyfunction]
#[pyo3(signature = (n_atoms=1_000_000, c=1e-3, delta_phi_mean=std::f64::consts::FRAC_PI_2, seed=42, n_runs=10_000, dominance_weight=100.0, shot_model="atom_loss"))]
#[allow(clippy::too_many_arguments)]
fn snr_report<'py>(
    py: Python<'py>,
    n_atoms: u64,
    c: f64,
    delta_phi_mean: f64,
    seed: u64,
    n_runs: usize,
    dominance_weight: f64,
    shot_model: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let shot_model = match shot_model {
        "atom_loss" => ShotNoiseModel::AtomLoss,
        "naive" => ShotNoiseModel::Naive,
        other => return Err(PyValueError::new_err(format!("unknown shot model {other:?}"))),
    };
    let params = NoiseParams { n_atoms, c, delta_phi_mean, seed, n_runs, dominance_weight, shot_model };
    let r = py.detach(|| noise::snr_report(&params)).map_err(err)?;
    let d = PyDict::new(py);
    for (k, v) in [
        ("shot_no_channel", r.shot_no_channel),
        ("shot_with_channel", r.shot_with_channel),
        ("shot_ratio", r.shot_ratio),
        ("shot_with_channel_naive", r.shot_with_channel_naive),
        ("phase_no_channel", r.phase_no_channel),
        ("phase_with_channel", r.phase_with_channel),
        ("phase_ratio", r.phase_ratio),
        ("dominance_weight", r.dominance_weight),
        ("combined_no_channel", r.combined_no_channel),
        ("combined_with_channel", r.combined_with_channel),
        ("combined_ratio", r.combined_ratio),
    ] {
        d.set_item(k, v)?;
    }
    d.set_item("channel_reduces_noise", r.channel_reduces_noise)?;
    for (k, e) in [
        ("mc_shot_no_channel", r.mc_shot_no_channel),
        ("mc_shot_with_channel", r.mc_shot_with_channel),
        ("mc_shot_with_channel_naive", r.mc_shot_with_channel_naive),
        ("mc_phase_no_channel", r.mc_phase_no_channel),
        ("mc_phase_with_channel", r.mc_phase_with_channel),
    ] {
        d.set_item(k, estimate_dict(py, e)?)?;
    }
    d.set_item("mc_phase_ratio", (r.mc_phase_ratio.estimate, r.mc_phase_ratio.std_error))?;
    Ok(d)
}

fn optimization_dict<'py>(
    py: Python<'py>,
    r: core::optimize::OptimizationResult,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("a_star", r.a_star)?;
    d.set_item("b_star", r.b_star)?;
    d.set_item("objective_value", r.objective_value)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("bracket", r.bracket)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (tolerance=1e-4))]
fn optimize_entropy(py: Python<'_>, tolerance: f64) -> PyResult<Bound<'_, PyDict>> {
    let r = core::optimize::optimize_entropy(tolerance).map_err(err)?;
    optimization_dict(py, r)
}

#[pyfunction]
fn png_ratio_extremum(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    optimization_dict(py, core::optimize::png_ratio_extremum())
}

#[pymodule]
fn gravchan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannelSpec>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyPureState>()?;
    m.add_class::<PyTransferOutcome>()?;
    m.add_function(wrap_pyfunction!(make_channel, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_bell, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_pair, m)?)?;
    m.add_function(wrap_pyfunction!(composite_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(apply_composite, m)?)?;
    m.add_function(wrap_pyfunction!(run_pulse_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(run_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(fringe_scan, m)?)?;
    m.add_function(wrap_pyfunction!(direct_measurement, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_phase, m)?)?;
    m.add_function(wrap_pyfunction!(shot_noise_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(phase_noise_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(snr_report, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(png_ratio_extremum, m)?)?;
    Ok(())
}
