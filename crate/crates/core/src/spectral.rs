// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Contraction coefficient and spectral gap.
//!
//! `kappa` is the operator norm of a channel restricted to traceless
//! operators, measured in the Frobenius norm:
//! `kappa = max_{tr A = 0} ||Φ(A)||_F / ||A||_F`, and the spectral gap is
//! `1 - kappa`. In vectorized form this is the largest singular value of
//! `Π W Π`, where `W = Σ_d w_d U_d ⊗ conj(U_d)` and `Π` removes the
//! component along `|phi>`. `W` need not be normal, so singular values are
//! used rather than eigenvalues.
//!
//! Two routes are provided: a dense SVD of the `N² × N²` superoperator and a
//! matrix-free power iteration on `Π W^dag W Π` that only applies the channel
//! and its adjoint.

use ndarray::{Array2, Axis};
use ndarray_linalg::{JobSvd, SVDDC};
use serde::Serialize;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE};
use crate::operator::{Operator, VectorizedState};
use crate::rng;

/// Default cap on `N²` for dense superoperators.
pub const DENSE_CAP: usize = 1 << 14;

/// Tie tolerance used by [`decide`].
pub const DECISION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMethod {
    Dense,
    Iterative,
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub kappa: f64,
    pub gap: f64,
    /// Unit-norm traceless direction achieving `kappa`.
    pub witness: VectorizedState,
    pub method: GapMethod,
    pub iterations: usize,
    /// Dense: `| ||Φ(witness)||_F - kappa |`. Iterative: eigen-residual
    /// `||M v - λ v||` of the final iterate.
    pub residual: f64,
    pub converged: bool,
}

impl GapReport {
    fn new(kappa: f64, witness: VectorizedState, method: GapMethod) -> Self {
        Self {
            kappa,
            gap: 1.0 - kappa,
            witness,
            method,
            iterations: 0,
            residual: 0.0,
            converged: true,
        }
    }
}

/// `W = Π_stages Σ_d w_d U_d ⊗ conj(U_d)`, so that `W vec(A) = vec(Φ(A))`.
pub fn build_w(channel: &Channel) -> Result<CMatrix> {
    build_w_capped(channel, DENSE_CAP)
}

pub fn build_w_capped(channel: &Channel, cap: usize) -> Result<CMatrix> {
    let n = channel.dim();
    let size = n * n;
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let mut total: Option<CMatrix> = None;
    for stage in channel.stages() {
        let mut w = CMatrix::zeros((size, size));
        for e in stage.elements() {
            let u = e.unitary.matrix();
            let term = linalg::kron(u, &linalg::conj(u));
            w.scaled_add(C64::new(e.weight, 0.0), &term);
        }
        total = Some(match total {
            None => w,
            Some(prev) => w.dot(&prev),
        });
    }
    Ok(total.expect("channels have at least one stage"))
}

/// Orthonormal basis of the traceless subspace of `C^{N×N}` as columns of
/// an `N² × (N²-1)` matrix: the off-diagonal units `|i><j|` followed by the
/// `N-1` diagonal generalized Gell-Mann directions.
pub fn traceless_basis(n: usize) -> CMatrix {
    let mut b = CMatrix::zeros((n * n, n * n - 1));
    let mut col = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                b[(i * n + j, col)] = ONE;
                col += 1;
            }
        }
    }
    for l in 1..n {
        let norm = ((l * (l + 1)) as f64).sqrt();
        for k in 0..l {
            b[(k * n + k, col)] = C64::new(1.0 / norm, 0.0);
        }
        b[(l * n + l, col)] = C64::new(-(l as f64) / norm, 0.0);
        col += 1;
    }
    b
}

/// Orthonormal basis (real inner product `Re tr(A^dag B)`) of the traceless
/// Hermitian matrices, vectorized, as columns of an `N² × (N²-1)` matrix.
pub fn traceless_hermitian_basis(n: usize) -> CMatrix {
    let mut b = CMatrix::zeros((n * n, n * n - 1));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut col = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            b[(i * n + j, col)] = C64::new(s, 0.0);
            b[(j * n + i, col)] = C64::new(s, 0.0);
            col += 1;
            b[(i * n + j, col)] = C64::new(0.0, -s);
            b[(j * n + i, col)] = C64::new(0.0, s);
            col += 1;
        }
    }
    for l in 1..n {
        let norm = ((l * (l + 1)) as f64).sqrt();
        for k in 0..l {
            b[(k * n + k, col)] = C64::new(1.0 / norm, 0.0);
        }
        b[(l * n + l, col)] = C64::new(-(l as f64) / norm, 0.0);
        col += 1;
    }
    b
}

fn project_out_phi(m: &mut CMatrix, n: usize) {
    // Π M with Π = I - |phi><phi|.
    let phi = VectorizedState::phi(n);
    let phi = phi.amplitudes();
    let overlaps: Vec<C64> = m
        .axis_iter(Axis(1))
        .map(|col| phi.iter().zip(col.iter()).map(|(p, x)| p.conj() * x).sum())
        .collect();
    for (mut col, ov) in m.axis_iter_mut(Axis(1)).zip(overlaps) {
        col.zip_mut_with(phi, |x, p| *x -= ov * p);
    }
}

/// Exact `kappa` from the SVD of `Π W` restricted to the traceless subspace.
pub fn spectral_gap_dense(channel: &Channel) -> Result<GapReport> {
    spectral_gap_dense_capped(channel, DENSE_CAP)
}

pub fn spectral_gap_dense_capped(channel: &Channel, cap: usize) -> Result<GapReport> {
    let n = channel.dim();
    if n == 1 {
        return Err(Error::InvalidArgument("no traceless operators in dimension 1".into()));
    }
    let w = build_w_capped(channel, cap)?;
    let basis = traceless_basis(n);
    let mut m = w.dot(&basis);
    project_out_phi(&mut m, n);
    let (_, s, vt) = m.svddc(JobSvd::Some)?;
    let vt = vt.ok_or_else(|| Error::Linalg("SVD returned no right singular vectors".into()))?;
    let kappa = s[0];
    let y: CVector = vt.row(0).mapv(|z| z.conj());
    let witness = VectorizedState::from_amplitudes(basis.dot(&y))?.normalized()?;
    let achieved = channel.apply(&witness.unvec())?.frobenius();
    let mut report = GapReport::new(kappa, witness, GapMethod::Dense);
    report.residual = (achieved - kappa).abs();
    Ok(report)
}

/// `kappa` with the maximization restricted to traceless Hermitian inputs.
/// Unital mixed-unitary channels preserve Hermiticity, so this is the norm
/// of a real linear map on the `N²-1` dimensional real space.
pub fn kappa_hermitian_dense(channel: &Channel) -> Result<f64> {
    let n = channel.dim();
    let w = build_w(channel)?;
    let h = traceless_hermitian_basis(n);
    let image = w.dot(&h);
    let r: Array2<f64> = linalg::dagger(&h).dot(&image).mapv(|z| z.re);
    let (_, s, _) = r.svddc(JobSvd::None)?;
    Ok(s[0])
}

#[derive(Debug, Clone, Copy)]
pub struct IterativeOptions {
    /// Relative Rayleigh-quotient change at which an iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub min_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200_000,
            min_iter: 10,
            restarts: 3,
            seed: 0,
        }
    }
}

struct PowerRun {
    kappa: f64,
    vector: CMatrix,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn traceless_projection(a: &mut CMatrix) {
    let n = a.nrows();
    let shift = linalg::trace(a) / n as f64;
    for i in 0..n {
        a[(i, i)] -= shift;
    }
}

fn normalize(a: &mut CMatrix) -> f64 {
    let norm = linalg::frobenius(a);
    if norm > 0.0 {
        a.mapv_inplace(|z| z / norm);
    }
    norm
}

fn power_run(channel: &Channel, adjoint: &Channel, start: CMatrix, opts: &IterativeOptions) -> PowerRun {
    let mut v = start;
    traceless_projection(&mut v);
    normalize(&mut v);
    let mut lambda_prev = f64::NAN;
    let mut delta_prev = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let image = channel.apply_matrix(&v);
        let lambda = linalg::frobenius(&image).powi(2);
        let mut next = adjoint.apply_matrix(&image);
        traceless_projection(&mut next);
        // ||M v - λ v|| with M = Π Φ^dag Φ Π.
        residual = linalg::frobenius_distance(&next, &v.mapv(|z| z * lambda));
        let norm = normalize(&mut next);
        if norm == 0.0 {
            // v lies in the kernel; every traceless vector is maximal.
            return PowerRun {
                kappa: 0.0,
                vector: v,
                iterations: it,
                residual: 0.0,
                converged: true,
            };
        }
        let delta = if lambda > 0.0 {
            (lambda - lambda_prev).abs() / lambda
        } else {
            0.0
        };
        if it >= opts.min_iter && delta < opts.tol {
            // Linear convergence at rate q leaves a tail of about
            // delta * q / (1 - q); require that tail to be below tol too.
            let q = if delta_prev > 0.0 { delta / delta_prev } else { 0.0 };
            let tail = if q < 1.0 { delta * q / (1.0 - q) } else { f64::INFINITY };
            if tail < opts.tol || lambda < 1e-300 {
                return PowerRun {
                    kappa: lambda.sqrt(),
                    vector: v,
                    iterations: it,
                    residual,
                    converged: true,
                };
            }
        }
        lambda_prev = lambda;
        delta_prev = delta;
        v = next;
    }
    let kappa = linalg::frobenius(&channel.apply_matrix(&v));
    PowerRun {
        kappa,
        vector: v,
        iterations: opts.max_iter,
        residual,
        converged: false,
    }
}

/// Matrix-free `kappa` by restarted power iteration on `Π W^dag W Π`.
///
/// Each step applies the channel and then its adjoint (Kraus set `{U^dag}`,
/// same weights), projecting out the trace afterwards. The best of
/// `opts.restarts` seeded starts is returned; a run that exhausts
/// `max_iter` is reported with `converged = false`.
pub fn spectral_gap_iterative(channel: &Channel, opts: &IterativeOptions) -> Result<GapReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {}", opts.tol)));
    }
    let n = channel.dim();
    if n == 1 {
        return Err(Error::InvalidArgument("no traceless operators in dimension 1".into()));
    }
    let adjoint = channel.adjoint_set();
    let mut best: Option<PowerRun> = None;
    let mut total_iterations = 0;
    let mut all_converged = true;
    for restart in 0..opts.restarts.max(1) {
        let mut rng = rng::stream(opts.seed, &[rng::LABEL_POWER_ITERATION, restart as u64]);
        let start = linalg::random_complex_matrix(n, n, &mut rng);
        let run = power_run(channel, &adjoint, start, opts);
        total_iterations += run.iterations;
        all_converged &= run.converged;
        if best.as_ref().is_none_or(|b| run.kappa > b.kappa) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let witness = Operator::new(best.vector)?.vec();
    let mut report = GapReport::new(best.kappa, witness, GapMethod::Iterative);
    report.iterations = total_iterations;
    report.residual = best.residual;
    report.converged = all_converged;
    Ok(report)
}

/// One instance of the non-expander decision problem.
#[derive(Debug, Clone)]
pub struct NonExpanderInstance {
    pub channel: Channel,
    pub alpha: f64,
    pub beta: f64,
    /// Declared promise gap `1/q`; `alpha - beta >= separation`.
    pub separation: f64,
}

impl NonExpanderInstance {
    pub fn new(channel: Channel, alpha: f64, beta: f64, separation: Option<f64>) -> Result<Self> {
        if !(alpha > beta) {
            return Err(Error::InvalidInstance(format!(
                "alpha ({alpha}) must exceed beta ({beta})"
            )));
        }
        let separation = separation.unwrap_or(alpha - beta);
        if !(separation > 0.0) || alpha - beta < separation - 1e-15 {
            return Err(Error::InvalidInstance(format!(
                "alpha - beta = {} is below the declared separation {separation}",
                alpha - beta
            )));
        }
        Ok(Self {
            channel,
            alpha,
            beta,
            separation,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    /// `kappa > alpha`: not an alpha-contractive expander.
    Yes,
    /// `kappa <= beta`: a beta-contractive expander.
    No,
    /// `beta < kappa <= alpha`.
    PromiseViolated,
}

/// Classifies `kappa` against the instance thresholds. YES needs
/// `kappa > alpha + DECISION_TOL`; NO needs `kappa <= beta + DECISION_TOL`.
pub fn classify(kappa: f64, alpha: f64, beta: f64) -> Decision {
    if kappa > alpha + DECISION_TOL {
        Decision::Yes
    } else if kappa <= beta + DECISION_TOL {
        Decision::No
    } else {
        Decision::PromiseViolated
    }
}

/// Decides an instance from an exact (dense) `kappa`.
pub fn decide(instance: &NonExpanderInstance) -> Result<(Decision, GapReport)> {
    let report = spectral_gap_dense(&instance.channel)?;
    Ok((classify(report.kappa, instance.alpha, instance.beta), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::UnitaryMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn iz() -> Channel {
        Channel::regular(vec![UnitaryMatrix::pauli(0), UnitaryMatrix::pauli(3)]).unwrap()
    }

    #[test]
    fn w_of_identity_is_identity() {
        let w = build_w(&Channel::identity(2).unwrap()).unwrap();
        assert_eq!(w, linalg::identity(4));
    }

    #[test]
    fn w_of_iz_channel_is_diagonal_1001() {
        // (I⊗I + Z⊗Z)/2, computed by hand.
        let w = build_w(&iz()).unwrap();
        let mut expected = CMatrix::zeros((4, 4));
        expected[(0, 0)] = ONE;
        expected[(3, 3)] = ONE;
        assert!(linalg::max_abs_diff(&w, &expected) < 1e-15);
    }

    #[test]
    fn w_acts_as_channel() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let ch = Channel::regular((0..3).map(|_| UnitaryMatrix::haar(4, &mut rng).unwrap()).collect())
            .unwrap()
            .power(2)
            .unwrap();
        let w = build_w(&ch).unwrap();
        let a = Operator::random(4, &mut rng);
        let lhs = w.dot(a.vec().amplitudes());
        let rhs = ch.apply(&a).unwrap().vec();
        let d = lhs.iter().zip(rhs.amplitudes().iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(d < 1e-10);
        // Unitality in vectorized form.
        let phi = VectorizedState::phi(4);
        let wphi = w.dot(phi.amplitudes());
        let d = wphi.iter().zip(phi.amplitudes().iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        assert!(d < 1e-10);
    }

    #[test]
    fn cap_is_enforced() {
        let ch = Channel::identity(8).unwrap();
        assert!(matches!(build_w_capped(&ch, 32), Err(Error::CapExceeded { size: 64, cap: 32 })));
    }

    #[test]
    fn dense_gap_examples() {
        let dep = spectral_gap_dense(&Channel::complete_depolarizer()).unwrap();
        assert!(dep.kappa < 1e-14);
        assert!((dep.gap - 1.0).abs() < 1e-14);
        assert!(dep.witness.inner(&VectorizedState::phi(2)).norm() < 1e-12);
        for q in 1..=3 {
            let id = spectral_gap_dense(&Channel::identity(1 << q).unwrap()).unwrap();
            assert!((id.kappa - 1.0).abs() < 1e-12);
            assert!(id.gap.abs() < 1e-12);
        }
        let r = spectral_gap_dense(&iz()).unwrap();
        assert!((r.kappa - 1.0).abs() < 1e-12);
        // The witness is σ_z / sqrt(2) up to phase: diagonal, traceless.
        let w = r.witness.unvec();
        assert!(w.matrix()[(0, 1)].norm() < 1e-12 && w.matrix()[(1, 0)].norm() < 1e-12);
        assert!(w.trace().norm() < 1e-12);
    }

    #[test]
    fn iterative_examples() {
        let opts = IterativeOptions::default();
        let dep = spectral_gap_iterative(&Channel::complete_depolarizer(), &opts).unwrap();
        assert!(dep.kappa <= 1e-8);
        assert!(dep.converged);
        let r = spectral_gap_iterative(&iz(), &opts).unwrap();
        assert!((r.kappa - 1.0).abs() < 1e-10);
        assert!(spectral_gap_iterative(&iz(), &IterativeOptions { tol: 0.0, ..opts }).is_err());
    }

    #[test]
    fn iterative_is_deterministic_given_seed() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let ch = Channel::regular((0..2).map(|_| UnitaryMatrix::haar(4, &mut rng).unwrap()).collect()).unwrap();
        let opts = IterativeOptions { seed: 99, ..Default::default() };
        let a = spectral_gap_iterative(&ch, &opts).unwrap();
        let b = spectral_gap_iterative(&ch, &opts).unwrap();
        assert_eq!(a.kappa.to_bits(), b.kappa.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn non_convergence_is_reported() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let ch = Channel::regular((0..2).map(|_| UnitaryMatrix::haar(4, &mut rng).unwrap()).collect()).unwrap();
        let opts = IterativeOptions { max_iter: 3, min_iter: 10, ..Default::default() };
        let r = spectral_gap_iterative(&ch, &opts).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn decide_examples() {
        let yes = NonExpanderInstance::new(iz(), 0.9, 0.5, None).unwrap();
        assert_eq!(decide(&yes).unwrap().0, Decision::Yes);
        let no = NonExpanderInstance::new(Channel::complete_depolarizer(), 0.9, 0.5, None).unwrap();
        assert_eq!(decide(&no).unwrap().0, Decision::No);
        // kappa = 1 exactly at alpha = 1 is a boundary value.
        let tie = NonExpanderInstance::new(Channel::identity(2).unwrap(), 1.0, 0.5, None).unwrap();
        assert_eq!(decide(&tie).unwrap().0, Decision::PromiseViolated);
    }

    #[test]
    fn instance_validation() {
        assert!(NonExpanderInstance::new(iz(), 0.5, 0.9, None).is_err());
        assert!(NonExpanderInstance::new(iz(), 0.9, 0.5, Some(0.5)).is_err());
        let inst = NonExpanderInstance::new(iz(), 0.9, 0.5, Some(0.1)).unwrap();
        assert_eq!(inst.separation, 0.1);
    }

    #[test]
    fn bases_are_orthonormal() {
        for n in [2, 3, 4] {
            for b in [traceless_basis(n), traceless_hermitian_basis(n)] {
                let g = linalg::dagger(&b).dot(&b);
                let re = g.mapv(|z| C64::new(z.re, 0.0));
                assert!(linalg::max_abs_diff(&re, &linalg::identity(n * n - 1)) < 1e-12);
                let phi = VectorizedState::phi(n);
                let ov = linalg::dagger(&b).dot(phi.amplitudes());
                assert!(ov.iter().all(|z| z.norm() < 1e-12));
            }
        }
    }
}
