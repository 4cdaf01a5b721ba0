// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON circuit files.
//!
//! ```json
//! {"qubits": 2, "gates": [{"kind": "H", "targets": [0]},
//!                         {"kind": "CNOT", "controls": [0], "targets": [1]}]}
//! ```
//!
//! Matrices are row-major arrays of rows, each entry a `[re, im]` pair.

use serde::{Deserialize, Serialize};

use super::{Gate, GateCircuit, GateKind, McuBase, NamedGate};
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::operator::UnitaryMatrix;

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
enum KindDoc {
    X,
    Y,
    Z,
    H,
    S,
    T,
    Cnot,
    Cz,
    Toffoli,
    Mcu,
    GlobalPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum NamedDoc {
    X,
    Y,
    Z,
    H,
    S,
    T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDoc {
    kind: KindDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    controls: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarities: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<NamedDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<MatrixRows>,
}

/// Serializable circuit document; also embedded inline in instance files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDoc {
    qubits: usize,
    gates: Vec<GateDoc>,
}

pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    m.rows()
        .into_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &MatrixRows) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("matrix must be square and non-empty".into()));
    }
    Ok(CMatrix::from_shape_fn((n, n), |(i, j)| {
        let [re, im] = rows[i][j];
        c64(re, im)
    }))
}

fn named_from_doc(d: NamedDoc) -> NamedGate {
    match d {
        NamedDoc::X => NamedGate::X,
        NamedDoc::Y => NamedGate::Y,
        NamedDoc::Z => NamedGate::Z,
        NamedDoc::H => NamedGate::H,
        NamedDoc::S => NamedGate::S,
        NamedDoc::T => NamedGate::T,
    }
}

fn named_to_doc(g: NamedGate) -> NamedDoc {
    match g {
        NamedGate::X => NamedDoc::X,
        NamedGate::Y => NamedDoc::Y,
        NamedGate::Z => NamedDoc::Z,
        NamedGate::H => NamedDoc::H,
        NamedGate::S => NamedDoc::S,
        NamedGate::T => NamedDoc::T,
    }
}

impl GateDoc {
    fn into_gate(self) -> Result<Gate> {
        let polarities = match self.polarities {
            None => vec![true; self.controls.len()],
            Some(p) => p
                .into_iter()
                .map(|b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(Error::Circuit(format!("polarity must be 0 or 1, found {other}"))),
                })
                .collect::<Result<_>>()?,
        };
        let single = |g| {
            if self.base.is_some() || self.phase.is_some() || self.matrix.is_some() {
                Err(Error::Circuit(format!("{g:?} takes no base, phase or matrix")))
            } else {
                Ok(GateKind::Single(g))
            }
        };
        let kind = match self.kind {
            KindDoc::X => single(NamedGate::X)?,
            KindDoc::Y => single(NamedGate::Y)?,
            KindDoc::Z => single(NamedGate::Z)?,
            KindDoc::H => single(NamedGate::H)?,
            KindDoc::S => single(NamedGate::S)?,
            KindDoc::T => single(NamedGate::T)?,
            KindDoc::Cnot => GateKind::Cnot,
            KindDoc::Cz => GateKind::Cz,
            KindDoc::Toffoli => GateKind::Toffoli,
            KindDoc::Mcu => match (self.base, &self.matrix) {
                (Some(b), None) => GateKind::Mcu(McuBase::Named(named_from_doc(b))),
                (None, Some(rows)) => {
                    let u = UnitaryMatrix::new(rows_to_matrix(rows)?)
                        .map_err(|e| Error::Circuit(format!("MCU matrix: {e}")))?;
                    GateKind::Mcu(McuBase::Matrix(u))
                }
                _ => return Err(Error::Circuit("MCU needs exactly one of `base` or `matrix`".into())),
            },
            KindDoc::GlobalPhase => {
                let [re, im] = self
                    .phase
                    .ok_or_else(|| Error::Circuit("GLOBAL_PHASE needs `phase`".into()))?;
                GateKind::GlobalPhase(c64(re, im))
            }
        };
        if !matches!(kind, GateKind::Mcu(_)) && (self.base.is_some() || self.matrix.is_some()) {
            return Err(Error::Circuit("only MCU takes `base` or `matrix`".into()));
        }
        if !matches!(kind, GateKind::GlobalPhase(_)) && self.phase.is_some() {
            return Err(Error::Circuit("only GLOBAL_PHASE takes `phase`".into()));
        }
        Ok(Gate {
            kind,
            targets: self.targets,
            controls: self.controls,
            polarities,
        })
    }

    fn from_gate(g: &Gate) -> Self {
        let mut doc = GateDoc {
            kind: KindDoc::X,
            targets: g.targets.clone(),
            controls: g.controls.clone(),
            polarities: None,
            base: None,
            phase: None,
            matrix: None,
        };
        if g.polarities.iter().any(|p| !p) {
            doc.polarities = Some(g.polarities.iter().map(|&p| p as u8).collect());
        }
        doc.kind = match &g.kind {
            GateKind::Single(n) => match n {
                NamedGate::X => KindDoc::X,
                NamedGate::Y => KindDoc::Y,
                NamedGate::Z => KindDoc::Z,
                NamedGate::H => KindDoc::H,
                NamedGate::S => KindDoc::S,
                NamedGate::T => KindDoc::T,
            },
            GateKind::Cnot => KindDoc::Cnot,
            GateKind::Cz => KindDoc::Cz,
            GateKind::Toffoli => KindDoc::Toffoli,
            GateKind::Mcu(McuBase::Named(n)) => {
                doc.base = Some(named_to_doc(*n));
                KindDoc::Mcu
            }
            GateKind::Mcu(McuBase::Matrix(u)) => {
                doc.matrix = Some(matrix_to_rows(u.matrix()));
                KindDoc::Mcu
            }
            GateKind::GlobalPhase(p) => {
                doc.phase = Some([p.re, p.im]);
                KindDoc::GlobalPhase
            }
        };
        doc
    }
}

impl CircuitDoc {
    pub fn into_circuit(self) -> Result<GateCircuit> {
        let mut c = GateCircuit::new(self.qubits);
        for (i, g) in self.gates.into_iter().enumerate() {
            let gate = g.into_gate().map_err(|e| Error::Circuit(format!("gate {i}: {e}")))?;
            c.push(gate)?;
        }
        Ok(c)
    }

    pub fn from_circuit(c: &GateCircuit) -> Self {
        Self {
            qubits: c.num_qubits(),
            gates: c.gates().iter().map(GateDoc::from_gate).collect(),
        }
    }
}

pub(crate) fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse(text: &str) -> Result<GateCircuit> {
    let doc: CircuitDoc = serde_json::from_str(text).map_err(json_error)?;
    doc.into_circuit()
}

/// Canonical text: pretty JSON, optional fields omitted when defaulted,
/// trailing newline.
pub fn serialize(c: &GateCircuit) -> String {
    let mut s = serde_json::to_string_pretty(&CircuitDoc::from_circuit(c)).expect("circuit docs always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = crate::rng::stream(3, &[]);
        let u = UnitaryMatrix::haar(4, &mut rng).unwrap();
        let c = GateCircuit::from_gates(
            3,
            vec![
                Gate::single(NamedGate::H, 0),
                Gate::cnot(0, 1),
                Gate::toffoli(0, 1, 2),
                super::super::multi_controlled(u, &[1, 2], &[0], &[false]).unwrap(),
                Gate::global_phase(c64(0.6, 0.8)),
            ],
        )
        .unwrap();
        let text = serialize(&c);
        let back = parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(serialize(&back), text);
    }

    #[test]
    fn unknown_kind_has_location() {
        let text = "{\n  \"qubits\": 1,\n  \"gates\": [\n    {\"kind\": \"FOO\", \"targets\": [0]}\n  ]\n}";
        match parse(text).unwrap_err() {
            Error::Parse { line, column, message } => {
                assert_eq!(line, 4);
                assert!(column > 0);
                assert!(message.contains("FOO"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn semantic_errors() {
        let err = parse(r#"{"qubits": 2, "gates": [{"kind": "X", "targets": [2]}]}"#).unwrap_err();
        assert!(err.to_string().contains("qubit index 2"), "{err}");
        let err = parse(r#"{"qubits": 2, "gates": [{"kind": "CNOT", "controls": [1], "targets": [1]}]}"#).unwrap_err();
        assert!(err.to_string().contains("overlapping"), "{err}");
        let err = parse(r#"{"qubits": 1, "gates": [{"kind": "MCU", "targets": [0], "matrix": [[[1,0],[1,0]],[[0,0],[1,0]]]}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("unitary"), "{err}");
    }

    #[test]
    fn default_polarities_are_one() {
        let c = parse(r#"{"qubits": 2, "gates": [{"kind": "MCU", "base": "X", "controls": [0], "targets": [1]}]}"#).unwrap();
        assert_eq!(c.gates()[0].polarities, vec![true]);
    }
}
