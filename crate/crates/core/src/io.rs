// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON documents for instances, channels, reduction specs, thermal models,
//! density matrices and witnesses.
//!
//! A Kraus entry is either a path to a circuit file (relative to the
//! document), `{"matrix": rows}` or `{"circuit": {...}}`. A channel is
//! given either as `kraus` (+ optional `weights`, default uniform) or as
//! `stages`, a list of such sets applied first to last.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, KrausElement, KrausStage};
use crate::circuit::{self, json_error, matrix_to_rows, rows_to_matrix, CircuitDoc, MatrixRows, RegisterLayout};
use crate::error::{Error, Result};
use crate::linalg::{c64, CVector};
use crate::operator::{Operator, UnitaryMatrix, VectorizedState};
use crate::reduction::{self, ReductionSpec};
use crate::spectral::{self, NonExpanderInstance};
use crate::thermal::ThermalModel;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KrausEntry {
    Path(String),
    Matrix { matrix: MatrixRows },
    Circuit { circuit: CircuitDoc },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageDoc {
    pub kraus: Vec<KrausEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<KrausEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<StageDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
}

/// A channel with optional instance thresholds.
#[derive(Debug, Clone)]
pub struct LoadedChannel {
    pub channel: Channel,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub separation: Option<f64>,
}

impl LoadedChannel {
    pub fn instance(&self) -> Result<NonExpanderInstance> {
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => NonExpanderInstance::new(self.channel.clone(), a, b, self.separation),
            _ => Err(Error::InvalidInstance("instance needs both alpha and beta".into())),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(json_error)
}

pub fn load_circuit(path: &Path) -> Result<circuit::GateCircuit> {
    circuit::parse(&read(path)?).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::Circuit(format!("{}: {other}", path.display())),
    })
}

fn resolve_entry(entry: &KrausEntry, dir: &Path, dim: usize) -> Result<UnitaryMatrix> {
    let u = match entry {
        KrausEntry::Path(p) => load_circuit(&dir.join(p))?.simulate_unitary()?,
        KrausEntry::Circuit { circuit } => circuit.clone().into_circuit()?.simulate_unitary()?,
        KrausEntry::Matrix { matrix } => UnitaryMatrix::new(rows_to_matrix(matrix)?)?,
    };
    // Re-check unitarity on every element, whatever its source.
    let u = UnitaryMatrix::new(u.matrix().clone())?;
    if u.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: u.dim(),
        });
    }
    Ok(u)
}

fn build_stage(kraus: &[KrausEntry], weights: Option<&Vec<f64>>, dir: &Path, dim: usize) -> Result<KrausStage> {
    let unitaries = kraus
        .iter()
        .enumerate()
        .map(|(i, e)| resolve_entry(e, dir, dim).map_err(|err| Error::InvalidChannel(format!("Kraus element {i}: {err}"))))
        .collect::<Result<Vec<_>>>()?;
    match weights {
        None => KrausStage::uniform(unitaries),
        Some(w) => {
            if w.len() != unitaries.len() {
                return Err(Error::InvalidChannel(format!(
                    "{} weights for {} Kraus elements",
                    w.len(),
                    unitaries.len()
                )));
            }
            KrausStage::new(
                w.iter()
                    .zip(unitaries)
                    .map(|(&weight, unitary)| KrausElement { weight, unitary })
                    .collect(),
            )
        }
    }
}

impl InstanceDoc {
    pub fn into_channel(self, dir: &Path) -> Result<LoadedChannel> {
        let dim = 1usize
            .checked_shl(self.qubits as u32)
            .filter(|_| self.qubits < 16)
            .ok_or_else(|| Error::InvalidChannel(format!("{} qubits is too many", self.qubits)))?;
        let stages = match (&self.kraus, &self.stages) {
            (Some(k), None) => vec![build_stage(k, self.weights.as_ref(), dir, dim)?],
            (None, Some(s)) if self.weights.is_none() => s
                .iter()
                .enumerate()
                .map(|(i, st)| {
                    build_stage(&st.kraus, st.weights.as_ref(), dir, dim)
                        .map_err(|e| Error::InvalidChannel(format!("stage {i}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?,
            _ => {
                return Err(Error::InvalidChannel(
                    "give either `kraus` (with optional `weights`) or `stages`".into(),
                ))
            }
        };
        Ok(LoadedChannel {
            channel: Channel::from_stages(stages)?,
            alpha: self.alpha,
            beta: self.beta,
            separation: self.separation,
        })
    }

    /// Stages form with inline matrices.
    pub fn from_channel(channel: &Channel, alpha: Option<f64>, beta: Option<f64>) -> Self {
        let stages = channel
            .stages()
            .iter()
            .map(|s| StageDoc {
                kraus: s
                    .elements()
                    .iter()
                    .map(|e| KrausEntry::Matrix {
                        matrix: matrix_to_rows(e.unitary.matrix()),
                    })
                    .collect(),
                weights: if s.is_uniform() {
                    None
                } else {
                    Some(s.elements().iter().map(|e| e.weight).collect())
                },
            })
            .collect();
        Self {
            qubits: channel.qubits(),
            kraus: None,
            weights: None,
            stages: Some(stages),
            alpha,
            beta,
            separation: None,
        }
    }
}

pub fn parse_channel(text: &str, dir: &Path) -> Result<LoadedChannel> {
    from_json::<InstanceDoc>(text)?.into_channel(dir)
}

pub fn load_channel(path: &Path) -> Result<LoadedChannel> {
    parse_channel(&read(path)?, &base_dir(path))
}

pub fn serialize_channel(channel: &Channel, alpha: Option<f64>, beta: Option<f64>) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceDoc::from_channel(channel, alpha, beta))
        .expect("channel docs always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisDoc {
    pub degree_per_stage: usize,
    pub seed: u64,
    #[serde(default = "default_target_kappa")]
    pub target_kappa: f64,
}

fn default_target_kappa() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseExpanderDoc {
    File(String),
    Synthesize(SynthesisDoc),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionSpecDoc {
    pub verifier: String,
    pub witness_qubits: usize,
    pub ancilla_qubits: usize,
    pub a: f64,
    pub b: f64,
    #[serde(default = "default_strict")]
    pub strict: bool,
    pub base_expander: BaseExpanderDoc,
}

fn default_strict() -> bool {
    true
}

pub fn load_reduction_spec(path: &Path) -> Result<ReductionSpec> {
    let doc: ReductionSpecDoc = from_json(&read(path)?)?;
    let dir = base_dir(path);
    let verifier = load_circuit(&dir.join(&doc.verifier))?;
    let layout = RegisterLayout::new(doc.witness_qubits, doc.ancilla_qubits)?;
    let (base_expander, kappa_f) = match &doc.base_expander {
        BaseExpanderDoc::File(p) => {
            let ch = load_channel(&dir.join(p))?.channel;
            let k = spectral::spectral_gap_dense(&ch)?.kappa;
            (ch, k)
        }
        BaseExpanderDoc::Synthesize(s) => {
            let b = reduction::build_base_expander(layout.verifier_qubits(), s.target_kappa, s.degree_per_stage, s.seed)?;
            (b.channel, b.kappa)
        }
    };
    Ok(ReductionSpec {
        verifier,
        layout,
        a: doc.a,
        b: doc.b,
        base_expander,
        kappa_f,
        strict: doc.strict,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub qubits: usize,
    pub unitaries: Vec<KrausEntry>,
    pub r0: f64,
    pub r1: f64,
}

pub fn load_model(path: &Path) -> Result<ThermalModel> {
    let doc: ModelDoc = from_json(&read(path)?)?;
    let dir = base_dir(path);
    let dim = 1usize << doc.qubits.min(15);
    let unitaries = doc
        .unitaries
        .iter()
        .map(|e| resolve_entry(e, &dir, dim))
        .collect::<Result<Vec<_>>>()?;
    ThermalModel::new(unitaries, doc.r0, doc.r1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    matrix: MatrixRows,
}

pub fn load_density(path: &Path) -> Result<Operator> {
    let doc: MatrixDoc = from_json(&read(path)?)?;
    Operator::new(rows_to_matrix(&doc.matrix)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum WitnessDoc {
    Amplitudes { amplitudes: Vec<[f64; 2]> },
    Matrix { matrix: MatrixRows },
}

/// A witness given as vectorized amplitudes or as an operator `A`; either
/// way it is normalized to a unit vector.
pub fn parse_witness(text: &str) -> Result<VectorizedState> {
    let state = match from_json::<WitnessDoc>(text)? {
        WitnessDoc::Amplitudes { amplitudes } => {
            VectorizedState::from_amplitudes(amplitudes.iter().map(|[re, im]| c64(*re, *im)).collect::<CVector>())?
        }
        WitnessDoc::Matrix { matrix } => Operator::new(rows_to_matrix(&matrix)?)?.vec(),
    };
    state.normalized()
}

pub fn load_witness(path: &Path) -> Result<VectorizedState> {
    parse_witness(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_channel_round_trip() {
        let text = r#"{"qubits": 1, "kraus": [{"matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]},
                       {"circuit": {"qubits": 1, "gates": [{"kind": "Z", "targets": [0]}]}}],
                       "alpha": 0.9, "beta": 0.5}"#;
        let loaded = parse_channel(text, Path::new(".")).unwrap();
        assert!(loaded.channel.is_regular());
        let inst = loaded.instance().unwrap();
        assert_eq!(inst.alpha, 0.9);
        let out = serialize_channel(&loaded.channel, loaded.alpha, loaded.beta);
        let again = parse_channel(&out, Path::new(".")).unwrap();
        assert_eq!(serialize_channel(&again.channel, again.alpha, again.beta), out);
    }

    #[test]
    fn rejects_non_unitary_and_mismatched_weights() {
        let bad = r#"{"qubits": 1, "kraus": [{"matrix": [[[2,0],[0,0]],[[0,0],[1,0]]]}]}"#;
        assert!(parse_channel(bad, Path::new(".")).is_err());
        let bad = r#"{"qubits": 1, "kraus": [{"matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]}], "weights": [0.5, 0.5]}"#;
        assert!(parse_channel(bad, Path::new(".")).is_err());
        let bad = r#"{"qubits": 2, "kraus": [{"matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]}]}"#;
        assert!(parse_channel(bad, Path::new(".")).is_err());
    }

    #[test]
    fn syntax_error_has_location() {
        let err = parse_channel("{\n  \"qubits\": 1,\n  \"kraus\": [,]\n}", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn witness_forms() {
        let w = parse_witness(r#"{"matrix": [[[1,0],[0,0]],[[0,0],[-1,0]]]}"#).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-15);
        let w2 = parse_witness(r#"{"amplitudes": [[1,0],[0,0],[0,0],[-1,0]]}"#).unwrap();
        assert_eq!(w.amplitudes(), w2.amplitudes());
        assert!(parse_witness(r#"{"amplitudes": [[1,0],[0,0],[0,0]]}"#).is_err());
    }
}
