//! Python bindings for `sqd-core`.
//!
//! Results that are plain records (point results, scans, recovery
//! histories) cross the boundary as dicts built from their JSON form.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sqd_core::determinant::Determinant;
use sqd_core::driver::output::{gaps_csv, points_csv};
use sqd_core::driver::{run_point as core_run_point, run_scan as core_run_scan, PointConfig, ScanConfig};
use sqd_core::integrals::{parse_fcidump, write_fcidump, MolecularHamiltonian};
use sqd_core::model::{model_hamiltonian, ModelParameters};
use sqd_core::oracle::fci_spin_state;
use sqd_core::recovery::{run_recovery as core_run_recovery, RecoveryConfig};
use sqd_core::sampler::{build_lucj, mp2_amplitudes, orbital_energies, sample, simulate_lucj_state, Connectivity, NoiseModel, SampleSet};
use sqd_core::SqdError;

fn py_err(e: SqdError) -> PyErr {
    match e.root() {
        SqdError::NotConverged { .. } | SqdError::ResourceGuard { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Molecular integrals for one (n_alpha, n_beta) sector.
#[pyclass(name = "Hamiltonian", frozen)]
struct PyHamiltonian {
    inner: MolecularHamiltonian,
}

#[pymethods]
impl PyHamiltonian {
    /// Parse FCIDUMP text.
    #[staticmethod]
    fn from_fcidump(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_fcidump(text).map_err(py_err)?,
        })
    }

    /// Read an FCIDUMP file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| PyValueError::new_err(format!("{}: {e}", path.display())))?;
        Self::from_fcidump(&text)
    }

    /// The built-in six-orbital model at C–H length `length` (Å).
    #[staticmethod]
    #[pyo3(signature = (length, n_alpha = 3, n_beta = 3))]
    fn model(length: f64, n_alpha: usize, n_beta: usize) -> PyResult<Self> {
        Ok(Self {
            inner: model_hamiltonian(&ModelParameters::default(), length, n_alpha, n_beta).map_err(py_err)?,
        })
    }

    fn with_sector(&self, n_alpha: usize, n_beta: usize) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_sector(n_alpha, n_beta).map_err(py_err)?,
        })
    }

    fn to_fcidump(&self) -> String {
        write_fcidump(&self.inner)
    }

    #[getter]
    fn n_orb(&self) -> usize {
        self.inner.n_orb
    }

    #[getter]
    fn n_alpha(&self) -> usize {
        self.inner.n_alpha
    }

    #[getter]
    fn n_beta(&self) -> usize {
        self.inner.n_beta
    }

    #[getter]
    fn core_energy(&self) -> f64 {
        self.inner.core_energy
    }

    fn h(&self, p: usize, q: usize) -> f64 {
        self.inner.h(p, q)
    }

    fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.inner.eri(p, q, r, s)
    }

    fn __repr__(&self) -> String {
        format!(
            "Hamiltonian(n_orb={}, n_alpha={}, n_beta={})",
            self.inner.n_orb, self.inner.n_alpha, self.inner.n_beta
        )
    }
}

/// Measured bit-strings with counts.
#[pyclass(name = "SampleSet", frozen)]
struct PySampleSet {
    inner: SampleSet,
}

#[pymethods]
impl PySampleSet {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: SampleSet::parse(text).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: SampleSet::load(&path).map_err(py_err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn valid_fraction(&self, n_alpha: usize, n_beta: usize) -> f64 {
        self.inner.valid_fraction(n_alpha, n_beta)
    }

    /// (bit-string, count) pairs; the alpha half comes first and orbital 0
    /// is the leftmost character of each half.
    fn counts(&self) -> Vec<(String, u64)> {
        self.inner.counts.iter().map(|(r, &c)| (r.to_string(), c)).collect()
    }

    #[getter]
    fn n_orb(&self) -> usize {
        self.inner.n_orb
    }

    #[getter]
    fn total_shots(&self) -> u64 {
        self.inner.total_shots()
    }

    fn __len__(&self) -> usize {
        self.inner.counts.len()
    }
}

/// Sample the MP2-parameterized LUCJ state of `ham`.
#[pyfunction]
#[pyo3(signature = (ham, shots, bit_flip_prob = 0.0, seed = 0, layers = 2, connectivity = "all-to-all"))]
fn simulate_samples(
    py: Python<'_>,
    ham: &PyHamiltonian,
    shots: u64,
    bit_flip_prob: f64,
    seed: u64,
    layers: usize,
    connectivity: &str,
) -> PyResult<PySampleSet> {
    let conn: Connectivity = connectivity.parse().map_err(py_err)?;
    let h = &ham.inner;
    let inner = py
        .detach(|| {
            let (ea, eb) = orbital_energies(h, h.n_alpha, h.n_beta);
            let amps = mp2_amplitudes(h, &ea, &eb)?;
            let params = build_lucj(&amps, layers, conn)?;
            let state = simulate_lucj_state(&params, &Determinant::hartree_fock(h.n_alpha, h.n_beta))?;
            sample(&state, shots, &NoiseModel { bit_flip_prob, seed })
        })
        .map_err(py_err)?;
    Ok(PySampleSet { inner })
}

/// Exact ground state of the target spin: {"energy", "s2", "dimension"}.
#[pyfunction]
#[pyo3(signature = (ham, spin, penalty = 1.0))]
fn exact_energy<'py>(py: Python<'py>, ham: &PyHamiltonian, spin: f64, penalty: f64) -> PyResult<Bound<'py, PyDict>> {
    let h = &ham.inner;
    let r = py
        .detach(|| fci_spin_state(h, h.n_alpha, h.n_beta, spin, penalty))
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("energy", r.energy)?;
    d.set_item("s2", r.s2)?;
    d.set_item("dimension", r.state.basis.dim())?;
    Ok(d)
}

/// Configuration recovery and subspace diagonalization on `samples`.
#[pyfunction]
#[pyo3(signature = (ham, samples, spin, n_batches = 10, batch_size = 3000, n_iterations = 10, seed = 0, penalty = 0.2))]
#[allow(clippy::too_many_arguments)]
fn run_recovery<'py>(
    py: Python<'py>,
    ham: &PyHamiltonian,
    samples: &PySampleSet,
    spin: f64,
    n_batches: usize,
    batch_size: usize,
    n_iterations: usize,
    seed: u64,
    penalty: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = RecoveryConfig {
        n_batches,
        batch_size,
        n_iterations,
        seed,
        ..RecoveryConfig::default()
    };
    cfg.solver.lambda = penalty;
    let out = py
        .detach(|| core_run_recovery(&ham.inner, &samples.inner, spin, &cfg))
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("energy", out.energy)?;
    d.set_item("s2", out.state.s2)?;
    d.set_item("dimension", out.state.basis.dim())?;
    d.set_item("profile", to_py(py, &out.profile)?)?;
    d.set_item("iterations", to_py(py, &out.iterations)?)?;
    Ok(d.into_any())
}

/// Run one point given as a TOML table (the body of a `[[point]]` entry).
#[pyfunction]
#[pyo3(signature = (point_toml, seed = 0))]
fn run_point<'py>(py: Python<'py>, point_toml: &str, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let cfg: PointConfig = toml::from_str(point_toml).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let r = py.detach(|| core_run_point(&cfg, seed, None)).map_err(py_err)?;
    let d = to_py(py, &r)?;
    d.set_item("points_csv", points_csv(std::slice::from_ref(&r)))?;
    Ok(d)
}

/// Run a scan configuration given as TOML text.
#[pyfunction]
fn run_scan<'py>(py: Python<'py>, config_toml: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ScanConfig::parse(config_toml).map_err(py_err)?;
    let scan = py.detach(|| core_run_scan(&cfg)).map_err(py_err)?;
    let d = to_py(py, &scan)?;
    d.set_item("scan_csv", gaps_csv(&scan.gaps))?;
    d.set_item("points_csv", points_csv(&scan.points))?;
    Ok(d)
}

#[pymodule]
fn sqd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PySampleSet>()?;
    m.add_function(wrap_pyfunction!(simulate_samples, m)?)?;
    m.add_function(wrap_pyfunction!(exact_energy, m)?)?;
    m.add_function(wrap_pyfunction!(run_recovery, m)?)?;
    m.add_function(wrap_pyfunction!(run_point, m)?)?;
    m.add_function(wrap_pyfunction!(run_scan, m)?)?;
    m.add("SCAN_LENGTHS", sqd_core::model::SCAN_LENGTHS.to_vec())?;
    Ok(())
}
