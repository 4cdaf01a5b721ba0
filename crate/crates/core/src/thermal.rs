// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Weak-coupling thermalization driven by a set of unitaries.
//!
//! With rates `R0, R1` and unitaries `U_1..U_D` the system obeys
//! `dρ/dt = γ (Φ - I)(ρ)` with `γ = (R0 + R1) D` and
//! `Φ(ρ) = Σ_α [R0 U_α ρ U_α^dag + R1 U_α^dag ρ U_α] / ((R0 + R1) D)`.
//! The rates stand for `R0 = Q0 + Q0*` and `R1 = Q1 + Q1*` of the bath;
//! they are taken as inputs here. Writing `ρ(t) = I/N + A(t)`, the
//! residual obeys `||A(t)||_F <= exp(-γ (1 - kappa) t) ||A(0)||_F`.

use ndarray_linalg::{Eigh, UPLO};
use rand::Rng;
use serde::Serialize;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix};
use crate::operator::{Operator, UnitaryMatrix};
use crate::spectral;

/// Largest `N` evolved with a dense generator exponential by default.
pub const DEFAULT_DENSE_MAX_DIM: usize = 16;

/// Truncation tolerance of the series route, relative to `||ρ||_F`.
pub const SERIES_TOL: f64 = 1e-12;

/// Slack added to the decay bound.
pub const BOUND_SLACK: f64 = 1e-8;

const DENSITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ThermalModel {
    unitaries: Vec<UnitaryMatrix>,
    r0: f64,
    r1: f64,
    channel: Channel,
    adjoint_closed: bool,
}

fn same_up_to_phase(u: &CMatrix, v: &CMatrix) -> bool {
    // U = c V with |c| = 1  ⇔  |tr(U^dag V)| = N.
    let n = u.nrows() as f64;
    let t: num_complex::Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    t.norm() >= n * (1.0 - 1e-10)
}

impl ThermalModel {
    pub fn new(unitaries: Vec<UnitaryMatrix>, r0: f64, r1: f64) -> Result<Self> {
        if !(r0 > 0.0 && r1 > 0.0 && r0.is_finite() && r1.is_finite()) {
            return Err(Error::InvalidArgument(format!("rates must be positive, got R0 = {r0}, R1 = {r1}")));
        }
        if unitaries.is_empty() {
            return Err(Error::InvalidArgument("a thermal model needs at least one unitary".into()));
        }
        let d = unitaries.len() as f64;
        let w0 = r0 / ((r0 + r1) * d);
        let w1 = r1 / ((r0 + r1) * d);
        let mut elements = Vec::with_capacity(2 * unitaries.len());
        for u in &unitaries {
            elements.push((w0, u.clone()));
            elements.push((w1, u.adjoint()));
        }
        let channel = Channel::new(elements)?;
        let adjoint_closed = unitaries.iter().all(|u| {
            let ud = linalg::dagger(u.matrix());
            unitaries.iter().any(|v| same_up_to_phase(&ud, v.matrix()))
        });
        Ok(Self {
            unitaries,
            r0,
            r1,
            channel,
            adjoint_closed,
        })
    }

    /// `k` Haar unitaries together with their adjoints.
    pub fn random_adjoint_closed<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Result<Self> {
        let base = (0..k).map(|_| UnitaryMatrix::haar(dim, rng)).collect::<Result<Vec<_>>>()?;
        let mut all = base.clone();
        all.extend(base.iter().map(UnitaryMatrix::adjoint));
        let r0 = rng.random_range(0.1..2.0);
        let r1 = rng.random_range(0.1..2.0);
        Self::new(all, r0, r1)
    }

    pub fn unitaries(&self) -> &[UnitaryMatrix] {
        &self.unitaries
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn adjoint_closed(&self) -> bool {
        self.adjoint_closed
    }

    pub fn dim(&self) -> usize {
        self.channel.dim()
    }

    /// Rate constant `γ = (R0 + R1) D`.
    pub fn gamma(&self) -> f64 {
        (self.r0 + self.r1) * self.unitaries.len() as f64
    }

    /// `(1/D) Σ U ρ U^dag`, which equals [`Self::channel`] when the set is
    /// closed under adjoints.
    pub fn uniform_channel(&self) -> Result<Channel> {
        Channel::regular(self.unitaries.clone())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Dense generator exponential up to this `N`; the series route above.
    pub dense_max_dim: usize,
    /// Permit the series route at all.
    pub allow_series: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dense_max_dim: DEFAULT_DENSE_MAX_DIM,
            allow_series: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
    /// `||ρ(t) - I/N||_F`.
    pub residuals: Vec<f64>,
}

/// Checks that `rho` is a density matrix within `1e-9`.
pub fn check_density(rho: &Operator) -> Result<()> {
    if !rho.is_hermitian(DENSITY_TOL) {
        return Err(Error::InvalidDensity("not Hermitian".into()));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
    }
    let herm = (rho.matrix() + &linalg::dagger(rho.matrix())).mapv(|z| z * 0.5);
    let (eig, _) = herm.eigh(UPLO::Lower)?;
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `|0…0><0…0|` on `dim` levels.
pub fn pure_zero(dim: usize) -> Operator {
    let mut m = CMatrix::zeros((dim, dim));
    m[(0, 0)] = linalg::ONE;
    Operator::new(m).expect("square by construction")
}

/// `exp(m)` by scaling and squaring with a Taylor kernel.
pub fn expm(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm1 = m
        .columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0i32;
    while norm1 / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let a = m.mapv(|z| z / 2f64.powi(s));
    let mut result = linalg::identity(n);
    let mut term = linalg::identity(n);
    for k in 1..40 {
        term = term.dot(&a).mapv(|z| z / k as f64);
        result += &term;
        if linalg::frobenius(&term) < 1e-18 * (n as f64) {
            break;
        }
    }
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

fn validate_times(times: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for &t in times {
        if !(t.is_finite() && t >= prev) {
            return Err(Error::InvalidArgument(format!(
                "times must be finite, non-negative and non-decreasing (got {t} after {prev})"
            )));
        }
        prev = t;
    }
    Ok(())
}

/// One step `ρ ↦ exp(x (Φ - I)) ρ` by the truncated series
/// `e^{-x} Σ_k x^k/k! Φ^k(ρ)`, with `x = γ h`.
fn series_step(channel: &Channel, rho: &CMatrix, x: f64) -> CMatrix {
    let mut term = rho.clone();
    let mut acc = rho.clone();
    let mut coeff = 1.0;
    for k in 1..200 {
        term = channel.apply_matrix(&term);
        coeff *= x / k as f64;
        acc.scaled_add(c64(coeff, 0.0), &term);
        // ||Φ^k(ρ)||_F <= ||ρ||_F, and with x <= 1/2 the remaining tail is
        // below the last coefficient.
        if coeff < SERIES_TOL {
            break;
        }
    }
    acc.mapv(|z| z * (-x).exp())
}

/// `ρ(t) = exp(t γ (Φ - I))(ρ(0))` at each requested time.
pub fn evolve(model: &ThermalModel, rho0: &Operator, times: &[f64], opts: &EvolveOptions) -> Result<Trajectory> {
    let n = model.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.dim(),
        });
    }
    check_density(rho0)?;
    validate_times(times)?;
    let gamma = model.gamma();
    let mixed = Operator::identity(n).scaled(c64(1.0 / n as f64, 0.0));
    let mut states = Vec::with_capacity(times.len());
    if n <= opts.dense_max_dim {
        let w = spectral::build_w(model.channel())?;
        let g = (w - linalg::identity(n * n)).mapv(|z| z * gamma);
        let v0 = rho0.vec();
        for &t in times {
            let state = if t == 0.0 {
                rho0.clone()
            } else {
                let e = expm(&g.mapv(|z| z * t));
                let v = crate::operator::VectorizedState::from_amplitudes(e.dot(v0.amplitudes()))?;
                v.unvec()
            };
            states.push(state);
        }
    } else if opts.allow_series {
        let h_max = 1.0 / (2.0 * gamma);
        let mut rho = rho0.matrix().clone();
        let mut now = 0.0;
        for &t in times {
            let span = t - now;
            if span > 0.0 {
                let steps = (span / h_max).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for _ in 0..steps {
                    rho = series_step(model.channel(), &rho, gamma * h);
                }
                now = t;
            }
            states.push(Operator::new(rho.clone())?);
        }
    } else {
        return Err(Error::CapExceeded {
            size: n,
            cap: opts.dense_max_dim,
        });
    }
    let residuals = states.iter().map(|s| (s - &mixed).frobenius()).collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        residuals,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayPoint {
    pub t: f64,
    pub residual: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub kappa: f64,
    pub gamma: f64,
    pub points: Vec<DecayPoint>,
    /// `min_t (bound - residual)`; negative means a violation beyond the
    /// `1e-8` slack only if it is below `-1e-8`.
    pub worst_margin: f64,
    pub holds: bool,
}

/// Evolves and compares against `exp(-γ (1 - kappa) t) ||A(0)||_F + 1e-8`.
pub fn decay_bound_check(
    model: &ThermalModel,
    rho0: &Operator,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<DecayReport> {
    let kappa = match spectral::spectral_gap_dense(model.channel()) {
        Ok(r) => r.kappa,
        Err(Error::CapExceeded { .. }) => {
            let r = spectral::spectral_gap_iterative(model.channel(), &spectral::IterativeOptions::default())?;
            if !r.converged {
                return Err(Error::Linalg("kappa did not converge".into()));
            }
            r.kappa
        }
        Err(e) => return Err(e),
    };
    let traj = evolve(model, rho0, times, opts)?;
    let gamma = model.gamma();
    let a0 = (rho0 - &Operator::identity(model.dim()).scaled(c64(1.0 / model.dim() as f64, 0.0))).frobenius();
    let points: Vec<DecayPoint> = traj
        .times
        .iter()
        .zip(&traj.residuals)
        .map(|(&t, &residual)| DecayPoint {
            t,
            residual,
            bound: (-gamma * (1.0 - kappa) * t).exp() * a0,
        })
        .collect();
    let worst_margin = points.iter().map(|p| p.bound - p.residual).fold(f64::INFINITY, f64::min);
    Ok(DecayReport {
        kappa,
        gamma,
        holds: worst_margin >= -BOUND_SLACK,
        points,
        worst_margin,
    })
}

/// `0` followed by `n - 1` log-spaced times in `[t_max·1e-3, t_max]`.
pub fn sample_times(t_max: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    if n <= 1 {
        return out;
    }
    let lo = (t_max * 1e-3).ln();
    let hi = t_max.ln();
    let m = n - 1;
    for i in 0..m {
        let f = if m == 1 { 1.0 } else { i as f64 / (m - 1) as f64 };
        out.push((lo + f * (hi - lo)).exp());
    }
    out
}
