// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Python bindings. Matrices cross the boundary as lists of rows of Python
//! complex numbers; results that the CLI prints as JSON come back as dicts.

use std::path::Path;

use ndarray::Array2;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qexpander::linalg::{CMatrix, C64};
use qexpander::protocol::{self, Shots};
use qexpander::spectral::{self, IterativeOptions};
use qexpander::thermal::{self, EvolveOptions};
use qexpander::{circuit, io, reduction};

create_exception!(pyqexpander, QexpanderError, PyException);

fn err(e: qexpander::Error) -> PyErr {
    QexpanderError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<C64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(QexpanderError::new_err("matrix must be square and non-empty"));
    }
    Ok(Array2::from_shape_vec((n, n), rows.into_iter().flatten().collect()).expect("square shape"))
}

fn from_matrix(m: &CMatrix) -> Vec<Vec<C64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// A mixed-unitary channel.
#[pyclass(module = "pyqexpander", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Channel {
    inner: qexpander::Channel,
    alpha: Option<f64>,
    beta: Option<f64>,
}

#[pymethods]
impl Channel {
    /// Channel from unitary matrices and optional weights (default uniform).
    #[new]
    #[pyo3(signature = (unitaries, weights=None))]
    fn new(unitaries: Vec<Vec<Vec<C64>>>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let us = unitaries
            .into_iter()
            .map(|rows| qexpander::UnitaryMatrix::new(to_matrix(rows)?).map_err(err))
            .collect::<PyResult<Vec<_>>>()?;
        let inner = match weights {
            None => qexpander::Channel::regular(us),
            Some(w) if w.len() == us.len() => qexpander::Channel::new(w.into_iter().zip(us).collect()),
            Some(w) => {
                return Err(QexpanderError::new_err(format!(
                    "{} weights for {} unitaries",
                    w.len(),
                    us.len()
                )))
            }
        }
        .map_err(err)?;
        Ok(Self {
            inner,
            alpha: None,
            beta: None,
        })
    }

    /// Loads an instance or channel file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let l = io::load_channel(Path::new(path)).map_err(err)?;
        Ok(Self {
            inner: l.channel,
            alpha: l.alpha,
            beta: l.beta,
        })
    }

    #[getter]
    fn qubits(&self) -> usize {
        self.inner.qubits()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn kraus_count(&self) -> u128 {
        self.inner.kraus_count()
    }

    #[getter]
    fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    #[getter]
    fn beta(&self) -> Option<f64> {
        self.beta
    }

    fn apply(&self, a: Vec<Vec<C64>>) -> PyResult<Vec<Vec<C64>>> {
        let op = qexpander::Operator::new(to_matrix(a)?).map_err(err)?;
        Ok(from_matrix(self.inner.apply(&op).map_err(err)?.matrix()))
    }

    /// `self` after `first`.
    fn compose(&self, first: &Channel) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.compose(&first.inner).map_err(err)?,
            alpha: None,
            beta: None,
        })
    }

    /// Spectral gap report: kappa, gap, method, residual, iterations, converged.
    #[pyo3(signature = (method="dense", tol=1e-12, seed=0))]
    fn gap<'py>(&self, py: Python<'py>, method: &str, tol: f64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let r = match method {
            "dense" => spectral::spectral_gap_dense(&self.inner),
            "iterative" => spectral::spectral_gap_iterative(
                &self.inner,
                &IterativeOptions {
                    tol,
                    seed,
                    ..IterativeOptions::default()
                },
            ),
            other => return Err(QexpanderError::new_err(format!("unknown method {other:?}"))),
        }
        .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("kappa", r.kappa)?;
        d.set_item("gap", r.gap)?;
        d.set_item("method", method)?;
        d.set_item("residual", r.residual)?;
        d.set_item("iterations", r.iterations)?;
        d.set_item("converged", r.converged)?;
        Ok(d)
    }

    /// Writes the channel (with any thresholds) as a JSON document.
    fn to_json(&self) -> String {
        io::serialize_channel(&self.inner, self.alpha, self.beta)
    }

    fn __repr__(&self) -> String {
        format!("Channel(qubits={}, kraus_count={})", self.inner.qubits(), self.inner.kraus_count())
    }
}

impl Channel {
    fn instance(&self, alpha: Option<f64>, beta: Option<f64>) -> PyResult<spectral::NonExpanderInstance> {
        match (alpha.or(self.alpha), beta.or(self.beta)) {
            (Some(a), Some(b)) => spectral::NonExpanderInstance::new(self.inner.clone(), a, b, None).map_err(err),
            _ => Err(QexpanderError::new_err("alpha and beta are required")),
        }
    }
}

/// A gate circuit.
#[pyclass(module = "pyqexpander", frozen)]
struct Circuit {
    inner: qexpander::GateCircuit,
}

#[pymethods]
impl Circuit {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: circuit::parse(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_circuit(Path::new(path)).map_err(err)?,
        })
    }

    fn serialize(&self) -> String {
        circuit::serialize(&self.inner)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn unitary(&self) -> PyResult<Vec<Vec<C64>>> {
        Ok(from_matrix(self.inner.simulate_unitary().map_err(err)?.matrix()))
    }
}

/// `"YES"`, `"NO"` or `"PROMISE_VIOLATED"` together with the exact kappa.
#[pyfunction]
#[pyo3(signature = (channel, alpha=None, beta=None))]
fn decide(channel: &Channel, alpha: Option<f64>, beta: Option<f64>) -> PyResult<(String, f64)> {
    let inst = channel.instance(alpha, beta)?;
    let (d, r) = spectral::decide(&inst).map_err(err)?;
    let name = match d {
        spectral::Decision::Yes => "YES",
        spectral::Decision::No => "NO",
        spectral::Decision::PromiseViolated => "PROMISE_VIOLATED",
    };
    Ok((name.to_string(), r.kappa))
}

/// Runs Arthur's checks. `witness` is a matrix `A` (None: honest witness);
/// `shots` is per Hadamard test (None: from the separation; 0: exact).
#[pyfunction]
#[pyo3(signature = (channel, witness=None, shots=None, seed=0, alpha=None, beta=None))]
fn verify<'py>(
    py: Python<'py>,
    channel: &Channel,
    witness: Option<Vec<Vec<C64>>>,
    shots: Option<u64>,
    seed: u64,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let inst = channel.instance(alpha, beta)?;
    let psi = match witness {
        None => protocol::merlin_witness(&inst.channel).map_err(err)?,
        Some(rows) => qexpander::Operator::new(to_matrix(rows)?)
            .map_err(err)?
            .vec()
            .normalized()
            .map_err(err)?,
    };
    let shots = match shots {
        None => Shots::PerPair(protocol::shots_for_separation(inst.alpha, inst.beta)),
        Some(0) => Shots::Exact,
        Some(n) => Shots::PerPair(n),
    };
    let o = protocol::arthur_verify(&inst, &psi, shots, seed).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("accepted", o.accepted)?;
    d.set_item("estimated_contraction_sq", o.estimated_contraction_sq)?;
    d.set_item("standard_error", o.standard_error)?;
    d.set_item("orthogonality_passed", o.orthogonality_passed)?;
    d.set_item("samples_used", o.samples_used)?;
    d.set_item("confidence", o.confidence)?;
    d.set_item("threshold", o.threshold)?;
    Ok(d)
}

/// `(alpha, beta)` of the reduced instance.
#[pyfunction]
fn thresholds(a: f64, b: f64, kappa_f: f64, witness_qubits: usize) -> (f64, f64) {
    reduction::thresholds(a, b, kappa_f, witness_qubits)
}

/// Synthesizes a certified base expander; returns `(channel, kappa, power)`.
#[pyfunction]
#[pyo3(signature = (qubits, target_kappa=0.1, degree=8, seed=0))]
fn synth_expander(qubits: usize, target_kappa: f64, degree: usize, seed: u64) -> PyResult<(Channel, f64, usize)> {
    let b = reduction::build_base_expander(qubits, target_kappa, degree, seed).map_err(err)?;
    let ch = Channel {
        inner: b.channel,
        alpha: None,
        beta: None,
    };
    Ok((ch, b.kappa, b.power))
}

/// Builds the reduced channel from a spec file; thresholds are attached.
#[pyfunction]
fn reduce(spec_path: &str) -> PyResult<Channel> {
    let spec = io::load_reduction_spec(Path::new(spec_path)).map_err(err)?;
    let red = reduction::build_reduction(&spec).map_err(err)?;
    Ok(Channel {
        inner: red.channel,
        alpha: Some(red.alpha),
        beta: Some(red.beta),
    })
}

/// Evolves a model file from `|0><0|` (or `rho0`) and returns
/// `(t, residual, bound)` rows.
#[pyfunction]
#[pyo3(signature = (model_path, times, rho0=None))]
fn thermalize(model_path: &str, times: Vec<f64>, rho0: Option<Vec<Vec<C64>>>) -> PyResult<Vec<(f64, f64, f64)>> {
    let model = io::load_model(Path::new(model_path)).map_err(err)?;
    let rho = match rho0 {
        None => thermal::pure_zero(model.dim()),
        Some(rows) => qexpander::Operator::new(to_matrix(rows)?).map_err(err)?,
    };
    thermal::check_density(&rho).map_err(err)?;
    let report = thermal::decay_bound_check(&model, &rho, &times, &EvolveOptions::default()).map_err(err)?;
    Ok(report.points.iter().map(|p| (p.t, p.residual, p.bound)).collect())
}

#[pymodule]
fn pyqexpander(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QexpanderError", m.py().get_type::<QexpanderError>())?;
    m.add_class::<Channel>()?;
    m.add_class::<Circuit>()?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(synth_expander, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(thermalize, m)?)?;
    Ok(())
}
