// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Arthur's verification protocol for the non-expander problem.
//!
//! Merlin sends `|ψ_A> = vec(A)`. Arthur checks that it is orthogonal to
//! `|phi>` (so `A` is traceless) and estimates `<ψ_A|W^dag W|ψ_A> =
//! ||Φ(A)||_F²` through
//!
//! `<ψ|W^dag W|ψ> = 1/D + (2/D²) Σ_{d<e} Re <ψ|V_{d,e}|ψ>`,
//! `V_{d,e} = (U_d^dag ⊗ U_d^T)(U_e ⊗ conj(U_e))`,
//!
//! each real part coming from a Hadamard test that outputs 0 with
//! probability `(1 + Re<ψ|V|ψ>)/2`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::operator::{UnitaryMatrix, VectorizedState};
use crate::rng;
use crate::spectral::{self, NonExpanderInstance};

/// Orthogonality tolerance in exact mode.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// Largest Kraus set the protocol will enumerate.
pub const MAX_DEGREE: usize = 4096;

/// Standard errors between the estimate and `alpha²` when sampling.
pub const MARGIN_SIGMAS: f64 = 3.0;

/// Shot budget of a sampled run; `Exact` evaluates every Hadamard test
/// probability instead of sampling it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    PerPair(u64),
}

#[derive(Debug, Clone)]
pub struct HadamardTestSpec {
    pub d: usize,
    pub e: usize,
    pub unitary: UnitaryMatrix,
}

impl HadamardTestSpec {
    /// `V_{d,e} = M ⊗ conj(M)` with `M = U_d^dag U_e`.
    pub fn new(channel: &Channel, d: usize, e: usize) -> Result<Self> {
        let elements = channel.kraus_elements(MAX_DEGREE)?;
        let get = |i: usize| {
            elements
                .get(i)
                .map(|k| k.unitary.matrix())
                .ok_or_else(|| Error::InvalidArgument(format!("Kraus index {i} out of range")))
        };
        let m = linalg::dagger(get(d)?).dot(get(e)?);
        let v = linalg::kron(&m, &linalg::conj(&m));
        Ok(Self {
            d,
            e,
            unitary: UnitaryMatrix::new_unchecked(v),
        })
    }
}

fn check_unit(psi: &VectorizedState) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// Exact output-0 probability of the Hadamard test: ancilla in `|+>`,
/// controlled-`V` on `ψ`, Hadamard on the ancilla. The ancilla-0 branch is
/// `(ψ + Vψ)/2`.
pub fn hadamard_test_probability(v: &UnitaryMatrix, psi: &VectorizedState) -> Result<f64> {
    hadamard_test_probability_raw(v, psi.amplitudes())
}

/// [`hadamard_test_probability`] for a plain state vector of any length.
pub fn hadamard_test_probability_raw(v: &UnitaryMatrix, a: &CVector) -> Result<f64> {
    let norm = linalg::vector_norm(a);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    if v.dim() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: v.dim(),
        });
    }
    let branch = (a + &v.matrix().dot(a)).mapv(|z| z * 0.5);
    Ok(linalg::vector_norm(&branch).powi(2).clamp(0.0, 1.0))
}

fn sample_fraction<R: Rng + ?Sized>(p: f64, shots: u64, rng: &mut R) -> f64 {
    let zeros = Binomial::new(shots, p.clamp(0.0, 1.0))
        .expect("probability clamped to [0, 1]")
        .sample(rng);
    zeros as f64 / shots as f64
}

/// Fraction of 0 outcomes in `shots` runs of the Hadamard test.
pub fn sample_hadamard_test(v: &UnitaryMatrix, psi: &VectorizedState, shots: u64, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let p = hadamard_test_probability(v, psi)?;
    let mut rng = rng::stream(seed, &[rng::LABEL_HADAMARD]);
    Ok(sample_fraction(p, shots, &mut rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionEstimate {
    pub value: f64,
    /// Worst-case standard error `(2/D²) sqrt(pairs/shots)`; zero when exact.
    pub standard_error: f64,
    pub samples: u64,
}

/// Estimates `<ψ|W^dag W|ψ>` for a D-regular channel.
///
/// `<ψ|V_{d,e}|ψ>` equals the Hilbert–Schmidt overlap of `U_d A U_d^dag`
/// and `U_e A U_e^dag`, which is how the per-pair probabilities are
/// evaluated. Sampled pairs draw from the stream `(seed, d, e)`.
pub fn estimate_contraction_sq(
    channel: &Channel,
    psi: &VectorizedState,
    shots: Shots,
    seed: u64,
) -> Result<ContractionEstimate> {
    if !channel.is_regular() {
        return Err(Error::NotRegular);
    }
    check_unit(psi)?;
    if psi.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            found: psi.dim(),
        });
    }
    if let Shots::PerPair(0) = shots {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let elements = channel.kraus_elements(MAX_DEGREE)?;
    let a = psi.unvec();
    let images: Vec<CMatrix> = elements.iter().map(|k| k.unitary.conjugate(a.matrix())).collect();
    let d = images.len();
    let mut sum = 0.0;
    let mut pairs = 0u64;
    for i in 0..d {
        for j in i + 1..d {
            let overlap: f64 = images[i].iter().zip(images[j].iter()).map(|(x, y)| (x.conj() * y).re).sum();
            let p = ((1.0 + overlap) / 2.0).clamp(0.0, 1.0);
            let p_hat = match shots {
                Shots::Exact => p,
                Shots::PerPair(n) => {
                    let mut rng = rng::stream(seed, &[rng::LABEL_HADAMARD, i as u64, j as u64]);
                    sample_fraction(p, n, &mut rng)
                }
            };
            sum += 2.0 * p_hat - 1.0;
            pairs += 1;
        }
    }
    let df = d as f64;
    let value = 1.0 / df + 2.0 / (df * df) * sum;
    let (standard_error, samples) = match shots {
        Shots::Exact => (0.0, 0),
        Shots::PerPair(n) => (2.0 / (df * df) * (pairs as f64 / n as f64).sqrt(), pairs * n),
    };
    Ok(ContractionEstimate {
        value,
        standard_error,
        samples,
    })
}

/// Exact check `|<phi|ψ>| <= ORTHOGONALITY_TOL`.
pub fn check_orthogonality(psi: &VectorizedState) -> bool {
    VectorizedState::phi(psi.dim()).inner(psi).norm() <= ORTHOGONALITY_TOL
}

/// Projective measurement `{|phi><phi|, I - |phi><phi|}`. Passing returns
/// the post-measurement state, projected onto the complement and
/// renormalized; failing returns `None`.
pub fn check_orthogonality_sampled<R: Rng + ?Sized>(
    psi: &VectorizedState,
    rng: &mut R,
) -> Result<Option<VectorizedState>> {
    check_unit(psi)?;
    let phi = VectorizedState::phi(psi.dim());
    let overlap = phi.inner(psi);
    let p_fail = overlap.norm_sqr().min(1.0);
    if rng.random::<f64>() < p_fail {
        return Ok(None);
    }
    let projected: CVector = psi.amplitudes() - &phi.amplitudes().mapv(|z| z * overlap);
    Ok(Some(VectorizedState::from_amplitudes(projected)?.normalized()?))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifierOutcome {
    pub accepted: bool,
    /// `None` when the orthogonality check already rejected.
    pub estimated_contraction_sq: Option<f64>,
    pub standard_error: f64,
    pub orthogonality_passed: bool,
    pub samples_used: u64,
    /// Normal-approximation probability that the estimate falls on the
    /// same side of the threshold as its mean would; 1 in exact mode.
    pub confidence: f64,
    pub threshold: f64,
}

/// Suggested shots per Hadamard test: `ceil(100 / (alpha² - beta²)²)`.
pub fn shots_for_separation(alpha: f64, beta: f64) -> u64 {
    let s = alpha * alpha - beta * beta;
    (100.0 / (s * s)).ceil() as u64
}

/// Runs Arthur's two checks. Accepts iff the orthogonality check passes and
/// the contraction estimate exceeds `alpha² - 3·SE`.
pub fn arthur_verify(
    instance: &NonExpanderInstance,
    psi: &VectorizedState,
    shots: Shots,
    seed: u64,
) -> Result<VerifierOutcome> {
    let alpha_sq = instance.alpha * instance.alpha;
    let rejected = |samples_used| VerifierOutcome {
        accepted: false,
        estimated_contraction_sq: None,
        standard_error: 0.0,
        orthogonality_passed: false,
        samples_used,
        confidence: 1.0,
        threshold: alpha_sq,
    };
    let (state, orth_samples) = match shots {
        Shots::Exact => {
            check_unit(psi)?;
            if !check_orthogonality(psi) {
                return Ok(rejected(0));
            }
            (psi.clone(), 0)
        }
        Shots::PerPair(_) => {
            let mut rng = rng::stream(seed, &[rng::LABEL_ORTHOGONALITY]);
            match check_orthogonality_sampled(psi, &mut rng)? {
                None => return Ok(rejected(1)),
                Some(s) => (s, 1),
            }
        }
    };
    let est = estimate_contraction_sq(&instance.channel, &state, shots, seed)?;
    let threshold = alpha_sq - MARGIN_SIGMAS * est.standard_error;
    let confidence = if est.standard_error > 0.0 {
        let z = (est.value - threshold).abs() / est.standard_error;
        0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
    } else {
        1.0
    };
    Ok(VerifierOutcome {
        accepted: est.value > threshold,
        estimated_contraction_sq: Some(est.value),
        standard_error: est.standard_error,
        orthogonality_passed: true,
        samples_used: orth_samples + est.samples,
        confidence,
        threshold,
    })
}

/// Honest Merlin: the top traceless singular direction of the channel.
pub fn merlin_witness(channel: &Channel) -> Result<VectorizedState> {
    match spectral::spectral_gap_dense(channel) {
        Ok(r) => Ok(r.witness),
        Err(Error::CapExceeded { .. }) => {
            let r = spectral::spectral_gap_iterative(channel, &spectral::IterativeOptions::default())?;
            Ok(r.witness)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, ONE, ZERO};
    use crate::operator::Operator;

    fn iz() -> Channel {
        Channel::regular(vec![UnitaryMatrix::pauli(0), UnitaryMatrix::pauli(3)]).unwrap()
    }

    fn sigma_vec(i: usize) -> VectorizedState {
        Operator::new(pauli(i)).unwrap().vec().normalized().unwrap()
    }

    fn ket0() -> VectorizedState {
        VectorizedState::from_amplitudes(ndarray::array![ONE, ZERO, ZERO, ZERO]).unwrap()
    }

    #[test]
    fn hadamard_probabilities() {
        let psi = sigma_vec(1);
        assert!((hadamard_test_probability(&UnitaryMatrix::identity(4), &psi).unwrap() - 1.0).abs() < 1e-15);
        // ⟨0|Z⊗Z|0⟩ = 1 and ⟨0|X⊗X|0⟩ = 0 on the 4-dim vectorized space.
        let zz = UnitaryMatrix::pauli(3).tensor(&UnitaryMatrix::pauli(3));
        assert!((hadamard_test_probability(&zz, &ket0()).unwrap() - 1.0).abs() < 1e-15);
        let xx = UnitaryMatrix::pauli(1).tensor(&UnitaryMatrix::pauli(1));
        assert!((hadamard_test_probability(&xx, &ket0()).unwrap() - 0.5).abs() < 1e-15);
        let zero = ndarray::array![ONE, ZERO];
        assert_eq!(hadamard_test_probability_raw(&UnitaryMatrix::pauli(3), &zero).unwrap(), 1.0);
        assert!((hadamard_test_probability_raw(&UnitaryMatrix::pauli(1), &zero).unwrap() - 0.5).abs() < 1e-15);
        let unnormalized = VectorizedState::from_amplitudes(ndarray::array![ONE, ONE, ZERO, ZERO]).unwrap();
        assert!(hadamard_test_probability(&xx, &unnormalized).is_err());
    }

    #[test]
    fn sampling_identity_is_exact() {
        let v = UnitaryMatrix::identity(4);
        assert_eq!(sample_hadamard_test(&v, &sigma_vec(2), 17, 4).unwrap(), 1.0);
        assert!(sample_hadamard_test(&v, &sigma_vec(2), 0, 4).is_err());
    }

    #[test]
    fn v_de_properties() {
        let mut rng = rng::stream(11, &[]);
        let ch = Channel::regular((0..3).map(|_| UnitaryMatrix::haar(2, &mut rng).unwrap()).collect()).unwrap();
        let v01 = HadamardTestSpec::new(&ch, 0, 1).unwrap().unitary;
        let v10 = HadamardTestSpec::new(&ch, 1, 0).unwrap().unitary;
        assert!(linalg::max_abs_diff(v01.matrix(), v10.adjoint().matrix()) < 1e-12);
        let v11 = HadamardTestSpec::new(&ch, 1, 1).unwrap().unitary;
        assert!(linalg::max_abs_diff(v11.matrix(), &linalg::identity(4)) < 1e-10);
    }

    #[test]
    fn overlap_route_matches_hadamard_circuit() {
        let mut rng = rng::stream(12, &[]);
        let ch = Channel::regular((0..3).map(|_| UnitaryMatrix::haar(4, &mut rng).unwrap()).collect()).unwrap();
        let psi = Operator::random(4, &mut rng).vec().normalized().unwrap();
        let mut direct = 0.0;
        for d in 0..3 {
            for e in d + 1..3 {
                let v = HadamardTestSpec::new(&ch, d, e).unwrap().unitary;
                direct += 2.0 * hadamard_test_probability(&v, &psi).unwrap() - 1.0;
            }
        }
        let expected = 1.0 / 3.0 + 2.0 / 9.0 * direct;
        let est = estimate_contraction_sq(&ch, &psi, Shots::Exact, 0).unwrap();
        assert!((est.value - expected).abs() < 1e-12);
        let phi_a = ch.apply(&psi.unvec()).unwrap().frobenius().powi(2);
        assert!((est.value - phi_a).abs() < 1e-10);
    }

    #[test]
    fn estimate_examples() {
        let id = Channel::identity(2).unwrap();
        assert!((estimate_contraction_sq(&id, &sigma_vec(1), Shots::Exact, 0).unwrap().value - 1.0).abs() < 1e-12);
        let dep = Channel::complete_depolarizer();
        assert!(estimate_contraction_sq(&dep, &sigma_vec(3), Shots::Exact, 0).unwrap().value.abs() < 1e-12);
        let weighted = Channel::new(vec![(0.3, UnitaryMatrix::pauli(0)), (0.7, UnitaryMatrix::pauli(1))]).unwrap();
        assert!(matches!(
            estimate_contraction_sq(&weighted, &sigma_vec(1), Shots::Exact, 0),
            Err(Error::NotRegular)
        ));
    }

    #[test]
    fn orthogonality_examples() {
        assert!(check_orthogonality(&sigma_vec(1)));
        assert!(!check_orthogonality(&VectorizedState::phi(2)));
        let mut rejects = 0;
        let trials = 20000;
        let mut rng = rng::stream(5, &[]);
        for _ in 0..trials {
            match check_orthogonality_sampled(&ket0(), &mut rng).unwrap() {
                None => rejects += 1,
                Some(s) => assert!(s.inner(&VectorizedState::phi(2)).norm() < 1e-12),
            }
        }
        let freq = rejects as f64 / trials as f64;
        // 1/2 with binomial sd ~0.0035.
        assert!((freq - 0.5).abs() < 0.02, "{freq}");
    }

    #[test]
    fn arthur_examples() {
        let yes = NonExpanderInstance::new(iz(), 0.9, 0.5, None).unwrap();
        let out = arthur_verify(&yes, &sigma_vec(3), Shots::Exact, 0).unwrap();
        assert!(out.accepted);
        assert!((out.estimated_contraction_sq.unwrap() - 1.0).abs() < 1e-12);
        let no = NonExpanderInstance::new(Channel::complete_depolarizer(), 0.9, 0.5, None).unwrap();
        let out = arthur_verify(&no, &sigma_vec(2), Shots::Exact, 0).unwrap();
        assert!(!out.accepted);
        let out = arthur_verify(&yes, &VectorizedState::phi(2), Shots::Exact, 0).unwrap();
        assert!(!out.accepted && !out.orthogonality_passed);
        let out = arthur_verify(&yes, &VectorizedState::phi(2), Shots::PerPair(10), 0).unwrap();
        assert!(!out.accepted && !out.orthogonality_passed);
    }

    #[test]
    fn merlin_on_iz_achieves_one() {
        let w = merlin_witness(&iz()).unwrap();
        let out = iz().apply(&w.unvec()).unwrap();
        assert!((out.frobenius() - 1.0).abs() < 1e-12);
        let dep = merlin_witness(&Channel::complete_depolarizer()).unwrap();
        assert!(check_orthogonality(&dep));
        assert!(Channel::complete_depolarizer().apply(&dep.unvec()).unwrap().frobenius() < 1e-12);
    }

    #[test]
    fn shot_budget() {
        assert_eq!(shots_for_separation(1.0, 0.0), 100);
    }
}
