// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate-level circuits and their dense simulation.
//!
//! Qubit 0 is the most significant bit of a basis-state index: on `m`
//! qubits, qubit `q` of index `x` is `(x >> (m - 1 - q)) & 1`.

mod format;

pub use format::{matrix_to_rows, parse, rows_to_matrix, serialize, CircuitDoc, MatrixRows};
pub(crate) use format::json_error;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, C64, I, ONE, ZERO};
use crate::operator::UnitaryMatrix;

/// Largest qubit count `simulate_unitary` will materialize.
pub const UNITARY_QUBIT_CAP: usize = 10;

/// Single-qubit gates usable on their own or as the base of an MCU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedGate {
    X,
    Y,
    Z,
    H,
    S,
    T,
}

impl NamedGate {
    pub fn matrix(self) -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            NamedGate::X => linalg::pauli(1),
            NamedGate::Y => linalg::pauli(2),
            NamedGate::Z => linalg::pauli(3),
            NamedGate::H => ndarray::array![[c64(h, 0.0), c64(h, 0.0)], [c64(h, 0.0), c64(-h, 0.0)]],
            NamedGate::S => ndarray::array![[ONE, ZERO], [ZERO, I]],
            NamedGate::T => ndarray::array![[ONE, ZERO], [ZERO, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedGate::X => "X",
            NamedGate::Y => "Y",
            NamedGate::Z => "Z",
            NamedGate::H => "H",
            NamedGate::S => "S",
            NamedGate::T => "T",
        }
    }
}

/// What an MCU gate applies to its targets.
#[derive(Debug, Clone, PartialEq)]
pub enum McuBase {
    Named(NamedGate),
    /// `2^k × 2^k` unitary on `k` targets, first target most significant.
    Matrix(UnitaryMatrix),
}

impl McuBase {
    fn matrix(&self) -> CMatrix {
        match self {
            McuBase::Named(g) => g.matrix(),
            McuBase::Matrix(u) => u.matrix().clone(),
        }
    }

    fn arity(&self) -> Option<usize> {
        match self {
            McuBase::Named(_) => Some(1),
            McuBase::Matrix(u) => linalg::log2_exact(u.dim()),
        }
    }
}

impl From<NamedGate> for McuBase {
    fn from(g: NamedGate) -> Self {
        McuBase::Named(g)
    }
}

impl From<UnitaryMatrix> for McuBase {
    fn from(u: UnitaryMatrix) -> Self {
        McuBase::Matrix(u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Single(NamedGate),
    Cnot,
    Cz,
    Toffoli,
    Mcu(McuBase),
    /// Multiplies the whole state by a unit-modulus scalar.
    GlobalPhase(C64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
    /// One entry per control; `false` controls on `|0>`.
    pub polarities: Vec<bool>,
}

impl Gate {
    pub fn single(g: NamedGate, target: usize) -> Self {
        Self {
            kind: GateKind::Single(g),
            targets: vec![target],
            controls: vec![],
            polarities: vec![],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            targets: vec![target],
            controls: vec![control],
            polarities: vec![true],
        }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cz,
            targets: vec![target],
            controls: vec![control],
            polarities: vec![true],
        }
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Toffoli,
            targets: vec![target],
            controls: vec![c1, c2],
            polarities: vec![true, true],
        }
    }

    pub fn global_phase(phase: C64) -> Self {
        Self {
            kind: GateKind::GlobalPhase(phase),
            targets: vec![],
            controls: vec![],
            polarities: vec![],
        }
    }

    /// The matrix applied to the targets when the controls match.
    pub fn base_matrix(&self) -> CMatrix {
        match &self.kind {
            GateKind::Single(g) => g.matrix(),
            GateKind::Cnot | GateKind::Toffoli => linalg::pauli(1),
            GateKind::Cz => linalg::pauli(3),
            GateKind::Mcu(b) => b.matrix(),
            GateKind::GlobalPhase(p) => ndarray::array![[*p]],
        }
    }

    fn expected_shape(&self) -> Option<(usize, Option<usize>)> {
        // (targets, controls) where None means any number of controls.
        match &self.kind {
            GateKind::Single(_) => Some((1, Some(0))),
            GateKind::Cnot | GateKind::Cz => Some((1, Some(1))),
            GateKind::Toffoli => Some((1, Some(2))),
            GateKind::Mcu(b) => b.arity().map(|k| (k, None)),
            GateKind::GlobalPhase(_) => Some((0, Some(0))),
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let (nt, nc) = self
            .expected_shape()
            .ok_or_else(|| Error::Circuit("MCU matrix dimension is not a power of two".into()))?;
        if self.targets.len() != nt {
            return Err(Error::Circuit(format!(
                "expected {nt} target(s), found {}",
                self.targets.len()
            )));
        }
        if let Some(nc) = nc {
            if self.controls.len() != nc {
                return Err(Error::Circuit(format!(
                    "expected {nc} control(s), found {}",
                    self.controls.len()
                )));
            }
        }
        if self.polarities.len() != self.controls.len() {
            return Err(Error::Circuit(format!(
                "{} polarities for {} controls",
                self.polarities.len(),
                self.controls.len()
            )));
        }
        let mut seen = vec![false; num_qubits];
        for &q in self.targets.iter().chain(&self.controls) {
            if q >= num_qubits {
                return Err(Error::Circuit(format!(
                    "qubit index {q} out of range for {num_qubits} qubits"
                )));
            }
            if seen[q] {
                return Err(Error::Circuit(format!("qubit {q} used twice (overlapping controls/targets)")));
            }
            seen[q] = true;
        }
        if let GateKind::GlobalPhase(p) = &self.kind {
            if (p.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Circuit(format!("global phase {p} is not unit modulus")));
            }
        }
        Ok(())
    }

    /// Applies the gate to every column of `state` (rows indexed by basis
    /// states of `m` qubits).
    fn apply_in_place(&self, state: &mut CMatrix, m: usize) {
        if let GateKind::GlobalPhase(p) = &self.kind {
            state.mapv_inplace(|z| z * p);
            return;
        }
        let base = self.base_matrix();
        let bit = |q: usize| 1usize << (m - 1 - q);
        let k = self.targets.len();
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|t| {
                (0..k)
                    .filter(|&j| (t >> (k - 1 - j)) & 1 == 1)
                    .map(|j| bit(self.targets[j]))
                    .sum()
            })
            .collect();
        let target_mask: usize = self.targets.iter().map(|&q| bit(q)).sum();
        let (ctrl_mask, ctrl_value) = self
            .controls
            .iter()
            .zip(&self.polarities)
            .fold((0usize, 0usize), |(mask, val), (&q, &p)| {
                (mask | bit(q), if p { val | bit(q) } else { val })
            });
        let dim = 1usize << m;
        let mut gathered = vec![ZERO; offsets.len()];
        for x in 0..dim {
            if x & target_mask != 0 || x & ctrl_mask != ctrl_value {
                continue;
            }
            for mut col in state.columns_mut() {
                for (g, &o) in gathered.iter_mut().zip(&offsets) {
                    *g = col[x | o];
                }
                for (r, &o) in offsets.iter().enumerate() {
                    let mut acc = ZERO;
                    for (c, g) in gathered.iter().enumerate() {
                        acc += base[(r, c)] * g;
                    }
                    col[x | o] = acc;
                }
            }
        }
    }

    /// Inverse gate.
    pub fn inverse(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::Single(NamedGate::S) | GateKind::Single(NamedGate::T) => {
                GateKind::Mcu(McuBase::Matrix(UnitaryMatrix::new_unchecked(linalg::dagger(&self.base_matrix()))))
            }
            GateKind::Mcu(McuBase::Named(g @ (NamedGate::S | NamedGate::T))) => {
                GateKind::Mcu(McuBase::Matrix(UnitaryMatrix::new_unchecked(linalg::dagger(&g.matrix()))))
            }
            GateKind::Mcu(McuBase::Matrix(u)) => GateKind::Mcu(McuBase::Matrix(u.adjoint())),
            GateKind::GlobalPhase(p) => GateKind::GlobalPhase(p.conj()),
            other => other.clone(),
        };
        Gate {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
            polarities: self.polarities.clone(),
        }
    }
}

/// Native multi-controlled gate: applies `base` to `targets` iff each control
/// qubit matches its polarity. No decomposition into elementary gates is
/// performed; [`mcu_decomposition_gate_count`] reports the size such a
/// decomposition would have.
pub fn multi_controlled(
    base: impl Into<McuBase>,
    targets: &[usize],
    controls: &[usize],
    polarities: &[bool],
) -> Result<Gate> {
    let gate = Gate {
        kind: GateKind::Mcu(base.into()),
        targets: targets.to_vec(),
        controls: controls.to_vec(),
        polarities: polarities.to_vec(),
    };
    let span = targets.iter().chain(controls).copied().max().map_or(0, |q| q + 1);
    gate.validate(span)?;
    Ok(gate)
}

/// Controlled version of a whole circuit, materialized as an inline-matrix
/// MCU on `targets` (which relabel the circuit's qubits in order).
pub fn multi_controlled_circuit(
    base: &GateCircuit,
    targets: &[usize],
    controls: &[usize],
    polarities: &[bool],
) -> Result<Gate> {
    if base.num_qubits() != targets.len() {
        return Err(Error::Circuit(format!(
            "circuit has {} qubits but {} targets were given",
            base.num_qubits(),
            targets.len()
        )));
    }
    multi_controlled(base.simulate_unitary()?, targets, controls, polarities)
}

/// Gate count of the ancilla-free decomposition of an `n`-controlled
/// single-qubit gate, quadratic in the number of controls.
pub fn mcu_decomposition_gate_count(controls: usize) -> usize {
    controls * controls
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCircuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl GateCircuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)
            .map_err(|e| Error::Circuit(format!("gate {}: {e}", self.gates.len())))?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gate count, the circuit-size measure `s`.
    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &GateCircuit) -> Result<Self> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Ok(Self {
            num_qubits: self.num_qubits,
            gates,
        })
    }

    /// Same gates on a register of `m >= num_qubits` qubits; the extra
    /// qubits are appended after the existing ones.
    pub fn widened(&self, m: usize) -> Result<Self> {
        if m < self.num_qubits {
            return Err(Error::Circuit(format!("cannot narrow {} qubits to {m}", self.num_qubits)));
        }
        Ok(Self {
            num_qubits: m,
            gates: self.gates.clone(),
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Product of the gate matrices in order (last gate leftmost).
    pub fn simulate_unitary(&self) -> Result<UnitaryMatrix> {
        if self.num_qubits > UNITARY_QUBIT_CAP {
            return Err(Error::CapExceeded {
                size: self.num_qubits,
                cap: UNITARY_QUBIT_CAP,
            });
        }
        let mut u = linalg::identity(1 << self.num_qubits);
        for g in &self.gates {
            g.apply_in_place(&mut u, self.num_qubits);
        }
        Ok(UnitaryMatrix::new_unchecked(u))
    }

    /// Simulates and checks `||U^dag U - I||_F <= 1e-10 N`; only for up to
    /// six qubits.
    pub fn check_unitary(&self) -> Result<UnitaryMatrix> {
        if self.num_qubits > 6 {
            return Err(Error::CapExceeded {
                size: self.num_qubits,
                cap: 6,
            });
        }
        let u = self.simulate_unitary()?;
        UnitaryMatrix::new(u.matrix().clone())
    }
}

/// Register partition of the reduction's joint space: witness qubits
/// `[0, n_w)`, ancilla qubits `[n_w, n_w + n_a)`, then one indicator qubit.
/// The verifier's output ("top") qubit is qubit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    pub witness_qubits: usize,
    pub ancilla_qubits: usize,
}

impl RegisterLayout {
    pub fn new(witness_qubits: usize, ancilla_qubits: usize) -> Result<Self> {
        if witness_qubits == 0 {
            return Err(Error::InvalidArgument("the witness register needs at least one qubit".into()));
        }
        Ok(Self {
            witness_qubits,
            ancilla_qubits,
        })
    }

    pub fn witness(&self) -> std::ops::Range<usize> {
        0..self.witness_qubits
    }

    pub fn ancilla(&self) -> std::ops::Range<usize> {
        self.witness_qubits..self.witness_qubits + self.ancilla_qubits
    }

    pub fn indicator(&self) -> usize {
        self.witness_qubits + self.ancilla_qubits
    }

    pub fn top(&self) -> usize {
        0
    }

    /// Qubits the verifier acts on (witness and ancilla).
    pub fn verifier_qubits(&self) -> usize {
        self.witness_qubits + self.ancilla_qubits
    }

    pub fn total(&self) -> usize {
        self.witness_qubits + self.ancilla_qubits + 1
    }
}
