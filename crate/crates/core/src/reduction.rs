// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Controlled expanders and the verifier-to-channel reduction.
//!
//! A controlled channel `ΛF` acts on a control register and a target
//! register with Kraus elements `ΛU = P ⊗ U + Q ⊗ I`, `Q = I - P`. If the
//! signed elements of `F` sum to zero it acts blockwise:
//! `ΛF(A ⊗ B) = PAP ⊗ F(B) + QAQ ⊗ B`. Without that property cross terms
//! `PAQ ⊗ (Σ w U) B + QAP ⊗ B (Σ w U)^dag` survive.
//!
//! The reduction composes, on witness + ancilla + indicator qubits:
//! 1. the ancilla verifier: depolarize the indicator unless all ancillas are 0;
//! 2. the witness verifier: depolarize the indicator if `V` leaves the top
//!    qubit in `|0>`;
//! 3. a base expander on witness + ancilla, controlled on the indicator
//!    being `|1>`.

use std::f64::consts::SQRT_2;

use crate::channel::Channel;
use crate::circuit::{self, Gate, GateCircuit, NamedGate, RegisterLayout};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector, ONE};
use crate::operator::{Operator, UnitaryMatrix};
use crate::rng;
use crate::spectral::{self, NonExpanderInstance};

/// Zero-sum tolerance on `||Σ w U||_F`.
pub const ZERO_SUM_TOL: f64 = 1e-10;

/// Largest composition power tried when certifying a base expander.
pub const MAX_POWER: usize = 64;

/// Attempts made by [`build_base_expander`] before giving up.
pub const SYNTHESIS_ATTEMPTS: u64 = 4;

/// Which basis states of the control register select the "apply" branch.
/// Qubit indices are relative to the control register, qubit 0 first.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlPattern {
    /// At least one of the listed qubits is `|1>`.
    AnyOne(Vec<usize>),
    /// Every listed qubit equals its bit.
    Match { qubits: Vec<usize>, bits: Vec<bool> },
    /// `V^dag P V` for the inner pattern's projector `P`.
    Conjugated {
        inner: Box<ControlPattern>,
        circuit: GateCircuit,
    },
}

impl ControlPattern {
    pub fn qubit_is(qubit: usize, bit: bool) -> Self {
        ControlPattern::Match {
            qubits: vec![qubit],
            bits: vec![bit],
        }
    }

    fn check_qubits(&self, register: usize) -> Result<()> {
        let qs: &[usize] = match self {
            ControlPattern::AnyOne(q) => q,
            ControlPattern::Match { qubits, bits } => {
                if qubits.len() != bits.len() {
                    return Err(Error::InvalidArgument("pattern qubits and bits differ in length".into()));
                }
                qubits
            }
            ControlPattern::Conjugated { inner, circuit } => {
                if circuit.num_qubits() != register {
                    return Err(Error::DimensionMismatch {
                        expected: register,
                        found: circuit.num_qubits(),
                    });
                }
                return inner.check_qubits(register);
            }
        };
        for (i, &q) in qs.iter().enumerate() {
            if q >= register {
                return Err(Error::Reduction(format!(
                    "control qubit {q} overlaps the target (control register has {register} qubits)"
                )));
            }
            if qs[..i].contains(&q) {
                return Err(Error::Reduction(format!("control qubit {q} listed twice")));
            }
        }
        Ok(())
    }

    /// Projector `P` on a register of `qubits` qubits.
    pub fn projector(&self, qubits: usize) -> Result<CMatrix> {
        self.check_qubits(qubits)?;
        let n = 1usize << qubits;
        let bit = |x: usize, q: usize| (x >> (qubits - 1 - q)) & 1 == 1;
        let diagonal = |pred: &dyn Fn(usize) -> bool| {
            let mut p = CMatrix::zeros((n, n));
            for x in (0..n).filter(|&x| pred(x)) {
                p[(x, x)] = ONE;
            }
            p
        };
        Ok(match self {
            ControlPattern::AnyOne(qs) => diagonal(&|x| qs.iter().any(|&q| bit(x, q))),
            ControlPattern::Match { qubits: qs, bits } => {
                diagonal(&|x| qs.iter().zip(bits).all(|(&q, &b)| bit(x, q) == b))
            }
            ControlPattern::Conjugated { inner, circuit } => {
                let v = circuit.simulate_unitary()?;
                let p = inner.projector(qubits)?;
                linalg::dagger(v.matrix()).dot(&p).dot(v.matrix())
            }
        })
    }
}

/// Where the target register sits relative to the control register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetPlacement {
    /// Joint space is control ⊗ target.
    After,
    /// Joint space is target ⊗ control.
    Before,
}

#[derive(Debug, Clone)]
pub struct ControlledChannel {
    pattern: ControlPattern,
    control_qubits: usize,
    placement: TargetPlacement,
    target: Channel,
    projector: CMatrix,
    realized: Channel,
}

impl ControlledChannel {
    /// Controlled version of `target` without any zero-sum requirement; see
    /// [`controlled_expander`] for the sign-doubled form.
    pub fn new(
        pattern: ControlPattern,
        control_qubits: usize,
        target: Channel,
        placement: TargetPlacement,
    ) -> Result<Self> {
        let p = pattern.projector(control_qubits)?;
        let q = linalg::identity(p.nrows()) - &p;
        let it = linalg::identity(target.dim());
        let joint = |c: &CMatrix, t: &CMatrix| match placement {
            TargetPlacement::After => linalg::kron(c, t),
            TargetPlacement::Before => linalg::kron(t, c),
        };
        let fixed = joint(&q, &it);
        // U ↦ P⊗U + Q⊗I respects products, so it can be applied per stage.
        let realized = target.map_homomorphic(|u| UnitaryMatrix::new_unchecked(joint(&p, u.matrix()) + &fixed))?;
        Ok(Self {
            pattern,
            control_qubits,
            placement,
            target,
            projector: p,
            realized,
        })
    }

    pub fn pattern(&self) -> &ControlPattern {
        &self.pattern
    }

    pub fn control_qubits(&self) -> usize {
        self.control_qubits
    }

    pub fn target(&self) -> &Channel {
        &self.target
    }

    pub fn realized(&self) -> &Channel {
        &self.realized
    }

    pub fn into_realized(self) -> Channel {
        self.realized
    }

    /// `P`, the apply branch.
    pub fn projector(&self) -> &CMatrix {
        &self.projector
    }

    /// `Q = I - P`, the skip branch.
    pub fn complement(&self) -> CMatrix {
        linalg::identity(self.projector.nrows()) - &self.projector
    }

    pub fn zero_sum_defect(&self) -> f64 {
        self.target.zero_sum_defect()
    }

    /// `A ⊗ B` in this channel's register order (`A` on the control).
    pub fn joint(&self, a: &Operator, b: &Operator) -> Operator {
        match self.placement {
            TargetPlacement::After => a.tensor(b),
            TargetPlacement::Before => b.tensor(a),
        }
    }

    /// The ideal block action `PAP ⊗ F(B) + QAQ ⊗ B`.
    pub fn block_action(&self, a: &Operator, b: &Operator) -> Result<Operator> {
        let p = &self.projector;
        let q = self.complement();
        let pap = Operator::new(p.dot(a.matrix()).dot(p))?;
        let qaq = Operator::new(q.dot(a.matrix()).dot(&q))?;
        let fb = self.target.apply(b)?;
        Ok(&self.joint(&pap, &fb) + &self.joint(&qaq, b))
    }

    /// `ΛF(A ⊗ B)` minus the ideal block action.
    pub fn cross_terms(&self, a: &Operator, b: &Operator) -> Result<Operator> {
        let actual = self.realized.apply(&self.joint(a, b))?;
        Ok(&actual - &self.block_action(a, b)?)
    }
}

/// `{U} ∪ {-U}` with halved weights; same action, zero signed sum.
pub fn sign_double(channel: &Channel) -> Channel {
    channel.sign_double()
}

/// Controlled `target`, sign-doubled first if its elements do not already
/// sum to zero.
pub fn controlled_expander(
    pattern: ControlPattern,
    control_qubits: usize,
    target: &Channel,
    placement: TargetPlacement,
) -> Result<ControlledChannel> {
    let target = if target.zero_sum_defect() > ZERO_SUM_TOL {
        target.sign_double()
    } else {
        target.clone()
    };
    if target.zero_sum_defect() > ZERO_SUM_TOL {
        return Err(Error::Reduction("target lacks the zero-sum property after sign doubling".into()));
    }
    ControlledChannel::new(pattern, control_qubits, target, placement)
}

/// The 8-element controlled complete depolarizer on one target qubit:
/// `ΛD(A ⊗ σ) = PAP ⊗ I tr(σ)/2 + QAQ ⊗ σ`.
pub fn controlled_depolarizer(
    pattern: ControlPattern,
    control_qubits: usize,
    placement: TargetPlacement,
) -> Result<ControlledChannel> {
    ControlledChannel::new(pattern, control_qubits, Channel::complete_depolarizer(), placement)
}

/// `(alpha, beta)` of the reduced instance:
/// `beta = (1 + kappa_F + 2^{n_w+1} b)/√2`, `alpha = sqrt(1 - (8/5)(1 - a²))`.
/// `alpha` is clamped at 0 when the radicand is negative.
pub fn thresholds(a: f64, b: f64, kappa_f: f64, n_w: usize) -> (f64, f64) {
    let beta = (1.0 + kappa_f + 2f64.powi(n_w as i32 + 1) * b) / SQRT_2;
    let alpha = (1.0 - 1.6 * (1.0 - a * a)).max(0.0).sqrt();
    (alpha, beta)
}

/// Certifies `stage^r` for the smallest `r` with `kappa(stage)^r <= target`.
/// Returns the composed channel, its measured kappa and `r`.
pub fn certify_power(stage: &Channel, target_kappa: f64) -> Result<(Channel, f64, usize)> {
    if !(target_kappa > 0.0 && target_kappa < 1.0) {
        return Err(Error::InvalidArgument(format!("target kappa {target_kappa} is not in (0, 1)")));
    }
    let k0 = spectral::spectral_gap_dense(stage)?.kappa;
    if k0 >= 1.0 - 1e-9 {
        return Err(Error::Reduction(format!("stage has kappa {k0:.6}; composition cannot contract")));
    }
    let mut r = 1;
    while k0.powi(r as i32) > target_kappa {
        r += 1;
        if r > MAX_POWER {
            return Err(Error::Reduction(format!("stage kappa {k0:.6} needs more than {MAX_POWER} compositions")));
        }
    }
    let composed = stage.power(r)?;
    let kappa = spectral::spectral_gap_dense(&composed)?.kappa;
    if kappa > target_kappa {
        return Err(Error::Reduction(format!(
            "composed kappa {kappa:.6} exceeds target {target_kappa}"
        )));
    }
    Ok((composed, kappa, r))
}

/// A certified base expander.
#[derive(Debug, Clone)]
pub struct BaseExpander {
    pub channel: Channel,
    pub kappa: f64,
    /// Kappa of one stage.
    pub stage_kappa: f64,
    pub power: usize,
    /// Attempt index whose stage was kept.
    pub attempt: u64,
}

/// Draws Haar-random `degree_per_stage`-regular stages on `num_qubits`
/// qubits and certifies a power of the first usable one.
pub fn build_base_expander(
    num_qubits: usize,
    target_kappa: f64,
    degree_per_stage: usize,
    seed: u64,
) -> Result<BaseExpander> {
    if degree_per_stage < 2 {
        return Err(Error::InvalidArgument("degree per stage must be at least 2".into()));
    }
    let dim = 1usize << num_qubits;
    let mut last = String::new();
    for attempt in 0..SYNTHESIS_ATTEMPTS {
        let mut rng = rng::stream(seed, &[rng::LABEL_SYNTHESIS, attempt]);
        let unitaries = (0..degree_per_stage)
            .map(|_| UnitaryMatrix::haar(dim, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let stage = Channel::regular(unitaries)?;
        match certify_power(&stage, target_kappa) {
            Ok((channel, kappa, power)) => {
                let stage_kappa = spectral::spectral_gap_dense(&stage)?.kappa;
                return Ok(BaseExpander {
                    channel,
                    kappa,
                    stage_kappa,
                    power,
                    attempt,
                });
            }
            Err(e @ Error::InvalidArgument(_)) => return Err(e),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::Synthesis { seed, reason: last })
}

/// Inputs of the reduction.
#[derive(Debug, Clone)]
pub struct ReductionSpec {
    pub verifier: GateCircuit,
    pub layout: RegisterLayout,
    /// Completeness and soundness of the verifier.
    pub a: f64,
    pub b: f64,
    pub base_expander: Channel,
    pub kappa_f: f64,
    /// Enforce `a > 0.99`, `b < 0.1·2^{-(n_w+1)}` and `kappa_F < 0.1`.
    pub strict: bool,
}

impl ReductionSpec {
    pub fn thresholds(&self) -> (f64, f64) {
        thresholds(self.a, self.b, self.kappa_f, self.layout.witness_qubits)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.layout.verifier_qubits();
        if self.verifier.num_qubits() != n {
            return Err(Error::Reduction(format!(
                "verifier acts on {} qubits, layout needs {n}",
                self.verifier.num_qubits()
            )));
        }
        if self.base_expander.qubits() != n {
            return Err(Error::Reduction(format!(
                "base expander acts on {} qubits, layout needs {n}",
                self.base_expander.qubits()
            )));
        }
        if !(0.0..=1.0).contains(&self.a) || !(0.0..=1.0).contains(&self.b) {
            return Err(Error::Reduction("a and b must lie in [0, 1]".into()));
        }
        if self.strict {
            let b_max = 0.1 * 2f64.powi(-(self.layout.witness_qubits as i32 + 1));
            if !(self.a > 0.99) {
                return Err(Error::Reduction(format!("strict mode needs a > 0.99, got {}", self.a)));
            }
            if !(self.b < b_max) {
                return Err(Error::Reduction(format!("strict mode needs b < {b_max}, got {}", self.b)));
            }
            if !(self.kappa_f < 0.1) {
                return Err(Error::Reduction(format!("strict mode needs kappa_F < 0.1, got {}", self.kappa_f)));
            }
        }
        // Relaxed specs still have to produce a well-posed instance.
        let (alpha, beta) = self.thresholds();
        if !(alpha > beta) {
            return Err(Error::Reduction(format!("alpha {alpha} does not exceed beta {beta}")));
        }
        Ok(())
    }
}

/// The built channel with its parts and thresholds.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub channel: Channel,
    pub alpha: f64,
    pub beta: f64,
    pub layout: RegisterLayout,
    pub ancilla_verifier: ControlledChannel,
    pub witness_verifier: ControlledChannel,
    pub controlled_base: ControlledChannel,
}

impl Reduction {
    /// Degree of the base expander actually controlled (after any sign
    /// doubling).
    pub fn base_degree(&self) -> u128 {
        self.controlled_base.target().kraus_count()
    }

    pub fn instance(&self) -> Result<NonExpanderInstance> {
        NonExpanderInstance::new(self.channel.clone(), self.alpha, self.beta, None)
    }
}

pub fn build_reduction(spec: &ReductionSpec) -> Result<Reduction> {
    spec.validate()?;
    let layout = spec.layout;
    let nv = layout.verifier_qubits();
    let ancillas: Vec<usize> = layout.ancilla().collect();
    let ancilla_verifier = controlled_depolarizer(ControlPattern::AnyOne(ancillas), nv, TargetPlacement::After)?;
    let top_zero = ControlPattern::Conjugated {
        inner: Box::new(ControlPattern::qubit_is(layout.top(), false)),
        circuit: spec.verifier.clone(),
    };
    let witness_verifier = controlled_depolarizer(top_zero, nv, TargetPlacement::After)?;
    let controlled_base = controlled_expander(
        ControlPattern::qubit_is(0, true),
        1,
        &spec.base_expander,
        TargetPlacement::Before,
    )?;
    let channel = controlled_base
        .realized()
        .compose(&witness_verifier.realized().compose(ancilla_verifier.realized())?)?;
    let (alpha, beta) = spec.thresholds();
    Ok(Reduction {
        channel,
        alpha,
        beta,
        layout,
        ancilla_verifier,
        witness_verifier,
        controlled_base,
    })
}

/// `A = |ψ><ψ| ⊗ |0…0><0…0| ⊗ |0><0| - I/2^{n_w+n_a+1}` for a witness `ψ`.
pub fn yes_witness(layout: &RegisterLayout, psi: &CVector) -> Result<Operator> {
    let nw = 1usize << layout.witness_qubits;
    if psi.len() != nw {
        return Err(Error::DimensionMismatch {
            expected: nw,
            found: psi.len(),
        });
    }
    let norm = linalg::vector_norm(psi);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    let rest = 1usize << (layout.ancilla_qubits + 1);
    let mut full = CVector::zeros(nw * rest);
    for (i, z) in psi.iter().enumerate() {
        full[i * rest] = *z;
    }
    let n = full.len();
    let psi_op = Operator::outer(&full, &full);
    Ok(&psi_op - &Operator::identity(n).scaled(c64(1.0 / n as f64, 0.0)))
}

fn swap(a: usize, b: usize) -> [Gate; 3] {
    [Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)]
}

/// Exact YES verifier (`a = 1`): accepts witness `|1…1>` with ancillas
/// `|0…0>`. For `n_w = 1` the top qubit already holds the witness and one
/// MCU suffices; otherwise a fresh ancilla is swapped to the top and set to
/// the AND of the witness bits.
pub fn toy_yes_verifier(n_w: usize, n_a: usize) -> Result<GateCircuit> {
    if n_w == 0 || n_a == 0 {
        return Err(Error::InvalidArgument("toy verifiers need at least one witness and one ancilla qubit".into()));
    }
    let m = n_w + n_a;
    if n_w == 1 {
        let g = circuit::multi_controlled(NamedGate::X, &[0], &[1], &[true])?;
        return GateCircuit::from_gates(m, vec![g]);
    }
    let mut gates: Vec<Gate> = swap(0, n_w).into();
    let controls: Vec<usize> = (1..=n_w).collect();
    gates.push(circuit::multi_controlled(NamedGate::X, &[0], &controls, &vec![true; n_w])?);
    GateCircuit::from_gates(m, gates)
}

/// Exact NO verifier (`b = 0`): moves a fresh ancilla onto the top qubit,
/// which therefore never reads `|1>` on a valid input.
pub fn toy_no_verifier(n_w: usize, n_a: usize) -> Result<GateCircuit> {
    if n_w == 0 || n_a == 0 {
        return Err(Error::InvalidArgument("toy verifiers need at least one witness and one ancilla qubit".into()));
    }
    GateCircuit::from_gates(n_w + n_a, swap(0, n_w).into())
}

/// `verifier` followed by the rotation `[[cos θ, -sin θ], [sin θ, cos θ]]`
/// on the top qubit: accepting outputs survive with probability `cos²θ`
/// and rejecting ones leak `sin²θ`.
pub fn noisy_verifier(verifier: &GateCircuit, theta: f64) -> Result<GateCircuit> {
    let (s, c) = theta.sin_cos();
    let rot = UnitaryMatrix::new(ndarray::array![[c64(c, 0.0), c64(-s, 0.0)], [c64(s, 0.0), c64(c, 0.0)]])?;
    let mut out = verifier.clone();
    out.push(circuit::multi_controlled(rot, &[0], &[], &[])?)?;
    Ok(out)
}

/// Largest acceptance probability of `verifier` over witnesses, with
/// ancillas in `|0…0>`: the top eigenvalue of `Π_top` compressed to the
/// witness subspace.
pub fn max_acceptance(verifier: &GateCircuit, layout: &RegisterLayout) -> Result<f64> {
    use ndarray_linalg::{Eigh, UPLO};
    let v = verifier.simulate_unitary()?;
    let n = 1usize << layout.verifier_qubits();
    let stride = 1usize << layout.ancilla_qubits;
    let nw = 1usize << layout.witness_qubits;
    // Columns of V restricted to |w>|0…0>, rows restricted to top = 1.
    let half = n / 2;
    let block = CMatrix::from_shape_fn((half, nw), |(i, j)| v.matrix()[(half + i, j * stride)]);
    let gram = linalg::dagger(&block).dot(&block);
    let (eig, _) = gram.eigh(UPLO::Lower)?;
    Ok(eig.iter().cloned().fold(0.0, f64::max).clamp(0.0, 1.0))
}
