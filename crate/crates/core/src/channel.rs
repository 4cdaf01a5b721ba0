// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Mixed-unitary (unital) channels `Φ(A) = Σ_d w_d U_d A U_d^dag`.
//!
//! A channel is stored as an ordered list of stages, each a weighted set of
//! unitaries; the Kraus set of the channel is the set of weighted products
//! `w_{i_r}···w_{i_1} U_{i_r}···U_{i_1}` across stages. Composition and
//! powers therefore stay linear in size even when the Kraus count is
//! astronomically large, which is what power-composed expanders need.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::operator::{Operator, UnitaryMatrix};

const WEIGHT_TOL: f64 = 1e-12;
const UNITAL_TOL: f64 = 1e-10;

/// One weighted unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausElement {
    pub weight: f64,
    pub unitary: UnitaryMatrix,
}

/// A single mixture `Σ_d w_d U_d (·) U_d^dag`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausStage {
    elements: Vec<KrausElement>,
}

impl KrausStage {
    pub fn new(elements: Vec<KrausElement>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        let dim = first.unitary.dim();
        let mut total = 0.0;
        for e in &elements {
            if e.unitary.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.unitary.dim(),
                });
            }
            if !(e.weight >= 0.0) || !e.weight.is_finite() {
                return Err(Error::InvalidChannel(format!("invalid weight {}", e.weight)));
            }
            total += e.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidChannel(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { elements })
    }

    pub fn uniform(unitaries: Vec<UnitaryMatrix>) -> Result<Self> {
        let d = unitaries.len() as f64;
        Self::new(
            unitaries
                .into_iter()
                .map(|unitary| KrausElement {
                    weight: 1.0 / d,
                    unitary,
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.elements[0].unitary.dim()
    }

    pub fn elements(&self) -> &[KrausElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.elements.len() as f64;
        self.elements.iter().all(|e| (e.weight - w).abs() <= WEIGHT_TOL)
    }

    pub fn apply(&self, a: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(a.dim());
        for e in &self.elements {
            let u = e.unitary.matrix();
            let term = u.dot(a).dot(&linalg::dagger(u));
            out.scaled_add(C64::new(e.weight, 0.0), &term);
        }
        out
    }

    /// `Σ_d w_d U_d`.
    pub fn weighted_sum(&self) -> CMatrix {
        let n = self.dim();
        let mut s = CMatrix::zeros((n, n));
        for e in &self.elements {
            s.scaled_add(C64::new(e.weight, 0.0), e.unitary.matrix());
        }
        s
    }

    fn map_unitaries(&self, f: impl Fn(&UnitaryMatrix) -> UnitaryMatrix) -> Self {
        Self {
            elements: self
                .elements
                .iter()
                .map(|e| KrausElement {
                    weight: e.weight,
                    unitary: f(&e.unitary),
                })
                .collect(),
        }
    }

    fn sign_doubled(&self) -> Self {
        let mut elements = Vec::with_capacity(2 * self.elements.len());
        for e in &self.elements {
            elements.push(KrausElement {
                weight: e.weight / 2.0,
                unitary: e.unitary.clone(),
            });
        }
        for e in &self.elements {
            elements.push(KrausElement {
                weight: e.weight / 2.0,
                unitary: e.unitary.negated(),
            });
        }
        Self { elements }
    }
}

/// A unital channel built from unitary Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim: usize,
    /// `stages[0]` acts first.
    stages: Vec<KrausStage>,
}

impl Channel {
    /// Weighted mixture of unitaries; weights must sum to one.
    pub fn new(elements: Vec<(f64, UnitaryMatrix)>) -> Result<Self> {
        let stage = KrausStage::new(
            elements
                .into_iter()
                .map(|(weight, unitary)| KrausElement { weight, unitary })
                .collect(),
        )?;
        Self::from_stages(vec![stage])
    }

    /// D-regular channel with uniform weights `1/D`.
    pub fn regular(unitaries: Vec<UnitaryMatrix>) -> Result<Self> {
        Self::from_stages(vec![KrausStage::uniform(unitaries)?])
    }

    pub fn from_stages(stages: Vec<KrausStage>) -> Result<Self> {
        let dim = stages
            .first()
            .ok_or_else(|| Error::InvalidChannel("no stages".into()))?
            .dim();
        if !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { dim });
        }
        for s in &stages {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
        }
        let channel = Self { dim, stages };
        let defect = channel.unitality_defect();
        if defect > UNITAL_TOL {
            return Err(Error::InvalidChannel(format!(
                "channel is not unital: ||Φ(I) - I||_F = {defect:.3e}"
            )));
        }
        Ok(channel)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::regular(vec![UnitaryMatrix::identity(dim)])
    }

    /// The 8-element zero-sum single-qubit complete depolarizer
    /// `{±I, ±X, ±Y, ±Z}/8`, which maps every σ to `I tr(σ)/2`.
    pub fn complete_depolarizer() -> Self {
        let mut us: Vec<UnitaryMatrix> = (0..4).map(UnitaryMatrix::pauli).collect();
        us.extend((0..4).map(|i| UnitaryMatrix::pauli(i).negated()));
        Self::regular(us).expect("Pauli mixture is a valid channel")
    }

    /// Uniform mixture over the `4^m` Pauli strings on `m` qubits.
    pub fn pauli_twirl(qubits: usize) -> Result<Self> {
        let mut strings = vec![UnitaryMatrix::identity(1)];
        for _ in 0..qubits {
            strings = strings
                .iter()
                .flat_map(|s| (0..4).map(move |i| s.tensor(&UnitaryMatrix::pauli(i))))
                .collect();
        }
        Self::regular(strings)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn stages(&self) -> &[KrausStage] {
        &self.stages
    }

    /// Number of Kraus operators (product over stages), saturating.
    pub fn kraus_count(&self) -> u128 {
        self.stages
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }

    /// True when every Kraus weight equals `1/D`.
    pub fn is_regular(&self) -> bool {
        self.stages.iter().all(KrausStage::is_uniform)
    }

    /// `D` for a D-regular channel.
    pub fn degree(&self) -> Option<u128> {
        self.is_regular().then(|| self.kraus_count())
    }

    /// Enumerates the Kraus set as weighted products, refusing to build more
    /// than `limit` elements.
    pub fn kraus_elements(&self, limit: usize) -> Result<Vec<KrausElement>> {
        let count = self.kraus_count();
        if count > limit as u128 {
            return Err(Error::TooManyKraus {
                count: count as f64,
                limit,
            });
        }
        let mut acc = vec![KrausElement {
            weight: 1.0,
            unitary: UnitaryMatrix::identity(self.dim),
        }];
        for stage in &self.stages {
            let mut next = Vec::with_capacity(acc.len() * stage.len());
            for prev in &acc {
                for e in stage.elements() {
                    next.push(KrausElement {
                        weight: prev.weight * e.weight,
                        unitary: e.unitary.mul(&prev.unitary),
                    });
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    /// Collapses all stages into one explicit Kraus set.
    pub fn flattened(&self, limit: usize) -> Result<Self> {
        if self.stages.len() == 1 {
            return Ok(self.clone());
        }
        let stage = KrausStage {
            elements: self.kraus_elements(limit)?,
        };
        Ok(Self {
            dim: self.dim,
            stages: vec![stage],
        })
    }

    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: a.dim(),
            });
        }
        Operator::new(self.apply_matrix(a.matrix()))
    }

    pub(crate) fn apply_matrix(&self, a: &CMatrix) -> CMatrix {
        let mut cur = self.stages[0].apply(a);
        for s in &self.stages[1..] {
            cur = s.apply(&cur);
        }
        cur
    }

    pub fn unitality_defect(&self) -> f64 {
        let id = linalg::identity(self.dim);
        linalg::frobenius_distance(&self.apply_matrix(&id), &id)
    }

    /// Channel with Kraus set `{U_d^dag}` and the same weights; for a
    /// unital channel this is the Hilbert–Schmidt adjoint.
    pub fn adjoint_set(&self) -> Self {
        Self {
            dim: self.dim,
            stages: self
                .stages
                .iter()
                .rev()
                .map(|s| s.map_unitaries(UnitaryMatrix::adjoint))
                .collect(),
        }
    }

    /// `self ∘ first`: applies `first`, then `self`.
    pub fn compose(&self, first: &Channel) -> Result<Self> {
        if first.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: first.dim,
            });
        }
        let mut stages = first.stages.clone();
        stages.extend(self.stages.iter().cloned());
        Ok(Self {
            dim: self.dim,
            stages,
        })
    }

    /// `r`-fold composition, `r >= 1`.
    pub fn power(&self, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("power must be at least 1".into()));
        }
        let mut stages = Vec::with_capacity(r * self.stages.len());
        for _ in 0..r {
            stages.extend(self.stages.iter().cloned());
        }
        Ok(Self {
            dim: self.dim,
            stages,
        })
    }

    /// `self ⊗ other` on the tensor-product space, `self` on the leading
    /// (more significant) factor.
    pub fn tensor(&self, other: &Channel) -> Self {
        let dim = self.dim * other.dim;
        if self.stages.len() == 1 && other.stages.len() == 1 {
            let mut elements = Vec::new();
            for a in self.stages[0].elements() {
                for b in other.stages[0].elements() {
                    elements.push(KrausElement {
                        weight: a.weight * b.weight,
                        unitary: a.unitary.tensor(&b.unitary),
                    });
                }
            }
            return Self {
                dim,
                stages: vec![KrausStage { elements }],
            };
        }
        let id_a = UnitaryMatrix::identity(self.dim);
        let id_b = UnitaryMatrix::identity(other.dim);
        let mut stages: Vec<KrausStage> = self
            .stages
            .iter()
            .map(|s| s.map_unitaries(|u| u.tensor(&id_b)))
            .collect();
        stages.extend(other.stages.iter().map(|s| s.map_unitaries(|u| id_a.tensor(u))));
        Self { dim, stages }
    }

    /// Kraus set `{U_i} ∪ {-U_i}` with halved weights. The channel action
    /// is unchanged; the weighted element sum becomes zero. For a staged
    /// channel only the first stage is doubled, which yields the same Kraus
    /// multiset as doubling the flattened set.
    pub fn sign_double(&self) -> Self {
        let mut stages = self.stages.clone();
        stages[0] = stages[0].sign_doubled();
        Self {
            dim: self.dim,
            stages,
        }
    }

    /// `Σ_k w_k K_k` over the full Kraus set, computed stagewise as the
    /// ordered product of per-stage sums.
    pub fn weighted_kraus_sum(&self) -> CMatrix {
        let mut acc = self.stages[0].weighted_sum();
        for s in &self.stages[1..] {
            acc = s.weighted_sum().dot(&acc);
        }
        acc
    }

    /// `||Σ_k w_k K_k||_F`, zero exactly when controlled versions of this
    /// channel have no cross terms.
    pub fn zero_sum_defect(&self) -> f64 {
        linalg::frobenius(&self.weighted_kraus_sum())
    }

    /// Each Kraus element replaced by `f(U)`. `f` must map unitaries to
    /// unitaries of a common dimension and respect products
    /// (`f(UV) = f(U) f(V)`) for the staged Kraus set to stay equal to the
    /// image of the flattened one.
    pub(crate) fn map_homomorphic(
        &self,
        f: impl Fn(&UnitaryMatrix) -> UnitaryMatrix,
    ) -> Result<Self> {
        let stages: Vec<KrausStage> = self.stages.iter().map(|s| s.map_unitaries(&f)).collect();
        Self::from_stages(stages)
    }
}

/// Pinching `B ↦ Σ_P P B P` for a resolution of the identity into
/// orthogonal projectors.
pub fn pinch(b: &Operator, projectors: &[CMatrix]) -> Result<Operator> {
    let n = b.dim();
    let mut out = CMatrix::zeros((n, n));
    for p in projectors {
        if p.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.nrows(),
            });
        }
        out += &p.dot(b.matrix()).dot(p);
    }
    Operator::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn op(m: CMatrix) -> Operator {
        Operator::new(m).unwrap()
    }

    fn random_channel(dim: usize, d: usize, rng: &mut ChaCha20Rng) -> Channel {
        Channel::regular((0..d).map(|_| UnitaryMatrix::haar(dim, rng).unwrap()).collect()).unwrap()
    }

    #[test]
    fn depolarizer_kills_sigma_z() {
        let out = Channel::complete_depolarizer().apply(&op(pauli(3))).unwrap();
        assert!(out.frobenius() < 1e-15);
    }

    #[test]
    fn identity_channel_is_identity() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = Operator::random(4, &mut rng);
        let out = Channel::identity(4).unwrap().apply(&a).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn iz_channel_dephases() {
        // (A + Z A Z)/2 keeps the diagonal and kills the off-diagonal part.
        let ch = Channel::regular(vec![UnitaryMatrix::pauli(0), UnitaryMatrix::pauli(3)]).unwrap();
        assert!(ch.apply(&op(pauli(1))).unwrap().frobenius() < 1e-15);
        let z = ch.apply(&op(pauli(3))).unwrap();
        assert!(linalg::max_abs_diff(z.matrix(), &pauli(3)) < 1e-15);
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let err = Channel::complete_depolarizer().apply(&Operator::zeros(4)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 4 }));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let err = Channel::new(vec![(0.5, UnitaryMatrix::identity(2)), (0.4, UnitaryMatrix::pauli(1))]);
        assert!(err.is_err());
    }

    #[test]
    fn compose_with_identity() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let phi = random_channel(4, 3, &mut rng);
        let id = Channel::identity(4).unwrap();
        for _ in 0..5 {
            let a = Operator::random(4, &mut rng);
            let lhs = id.compose(&phi).unwrap().apply(&a).unwrap();
            let rhs = phi.apply(&a).unwrap();
            assert!(linalg::max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-12);
        }
    }

    #[test]
    fn compose_kraus_set_is_weighted_products() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let f = random_channel(2, 2, &mut rng);
        let g = random_channel(2, 3, &mut rng);
        let gf = g.compose(&f).unwrap();
        assert_eq!(gf.kraus_count(), 6);
        let flat = gf.flattened(100).unwrap();
        let a = Operator::random(2, &mut rng);
        let direct = g.apply(&f.apply(&a).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(flat.apply(&a).unwrap().matrix(), direct.matrix()) < 1e-12);
    }

    #[test]
    fn tensor_of_depolarizers_kills_zz() {
        let dd = Channel::complete_depolarizer().tensor(&Channel::complete_depolarizer());
        let zz = op(linalg::kron(&pauli(3), &pauli(3)));
        assert!(dd.apply(&zz).unwrap().frobenius() < 1e-14);
        assert_eq!(dd.kraus_count(), 64);
    }

    #[test]
    fn staged_tensor_matches_flat_tensor() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let f = random_channel(2, 2, &mut rng);
        let g = random_channel(2, 2, &mut rng).power(2).unwrap();
        let staged = f.tensor(&g);
        let flat = f.tensor(&g.flattened(16).unwrap());
        let a = Operator::random(4, &mut rng);
        let d = linalg::max_abs_diff(staged.apply(&a).unwrap().matrix(), flat.apply(&a).unwrap().matrix());
        assert!(d < 1e-12);
    }

    #[test]
    fn hermitian_set_is_adjoint_closed() {
        let h = UnitaryMatrix::new(
            ndarray::array![[1.0, 1.0], [1.0, -1.0]].mapv(|x: f64| C64::new(x / 2f64.sqrt(), 0.0)),
        )
        .unwrap();
        let ch = Channel::regular(vec![h]).unwrap();
        assert!(ch.adjoint_set().kraus_elements(1).unwrap()[0].unitary.matrix()
            .iter()
            .zip(ch.kraus_elements(1).unwrap()[0].unitary.matrix().iter())
            .all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn adjoint_set_is_hilbert_schmidt_adjoint() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let phi = random_channel(4, 3, &mut rng).power(2).unwrap();
        let a = Operator::random(4, &mut rng);
        let b = Operator::random(4, &mut rng);
        // <B, Φ(A)> = <Φ^dag(B), A>
        let lhs = linalg::trace(&linalg::dagger(b.matrix()).dot(phi.apply(&a).unwrap().matrix()));
        let rhs = linalg::trace(&linalg::dagger(phi.adjoint_set().apply(&b).unwrap().matrix()).dot(a.matrix()));
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn sign_double_preserves_action_and_zeroes_sum() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let pauli4 = Channel::regular((0..4).map(UnitaryMatrix::pauli).collect()).unwrap();
        let doubled = pauli4.sign_double();
        assert_eq!(doubled.kraus_count(), 8);
        assert!(doubled.zero_sum_defect() < 1e-15);
        let phi = random_channel(4, 3, &mut rng).power(3).unwrap();
        let phi2 = phi.sign_double();
        assert!(phi2.zero_sum_defect() < 1e-12);
        assert!(phi2.flattened(1000).unwrap().zero_sum_defect() < 1e-12);
        for _ in 0..5 {
            let a = Operator::random(4, &mut rng);
            let d = linalg::max_abs_diff(phi.apply(&a).unwrap().matrix(), phi2.apply(&a).unwrap().matrix());
            assert!(d < 1e-12);
        }
        // Doubling an already zero-sum set keeps the action.
        let quad = doubled.sign_double();
        assert_eq!(quad.kraus_count(), 16);
        let a = Operator::random(2, &mut rng);
        let d = linalg::max_abs_diff(quad.apply(&a).unwrap().matrix(), doubled.apply(&a).unwrap().matrix());
        assert!(d < 1e-12);
    }

    #[test]
    fn pauli_twirl_is_completely_depolarizing() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let twirl = Channel::pauli_twirl(2).unwrap();
        let a = Operator::random_traceless(4, &mut rng);
        assert!(twirl.apply(&a).unwrap().frobenius() < 1e-12);
    }
}
