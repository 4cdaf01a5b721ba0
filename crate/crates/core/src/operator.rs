// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Operators, unitaries and the vectorization `A <-> |psi_A>`.
//!
//! Vectorization is row-major: the amplitude at index `i * N + j` is the
//! matrix entry `a_ij`, i.e. `|psi_A> = sum_ij a_ij |i> ⊗ |j>`. With this
//! convention `vec(U A U^dag) = (U ⊗ conj(U)) vec(A)`.

use ndarray::Array1;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Dense complex square matrix acting on an `N`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    entries: CMatrix,
}

impl Operator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: linalg::identity(dim),
        }
    }

    /// `|psi><phi|`.
    pub fn outer(psi: &CVector, phi: &CVector) -> Self {
        let n = psi.len();
        let mut m = CMatrix::zeros((n, phi.len()));
        for i in 0..n {
            for j in 0..phi.len() {
                m[(i, j)] = psi[i] * phi[j].conj();
            }
        }
        Self { entries: m }
    }

    /// Standard Gaussian entries.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self {
            entries: linalg::random_complex_matrix(dim, dim, rng),
        }
    }

    /// Random operator with zero trace.
    pub fn random_traceless<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self::random(dim, rng).traceless_part()
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.entries)
    }

    /// `sqrt(sum_ij |a_ij|^2)`.
    pub fn frobenius(&self) -> f64 {
        linalg::frobenius(&self.entries)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: linalg::dagger(&self.entries),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::max_abs_diff(&self.entries, &linalg::dagger(&self.entries)) <= tol
    }

    /// `A - tr(A) I / N`.
    pub fn traceless_part(&self) -> Self {
        let n = self.dim();
        let shift = self.trace() / n as f64;
        let mut m = self.entries.clone();
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        Self { entries: m }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            entries: self.entries.mapv(|z| z * s),
        }
    }

    pub fn tensor(&self, other: &Operator) -> Self {
        Self {
            entries: linalg::kron(&self.entries, &other.entries),
        }
    }

    pub fn vec(&self) -> VectorizedState {
        let n = self.dim();
        let flat: Vec<C64> = self.entries.iter().copied().collect();
        debug_assert_eq!(flat.len(), n * n);
        VectorizedState {
            dim: n,
            amplitudes: Array1::from(flat),
        }
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            entries: &self.entries + &rhs.entries,
        }
    }
}

/// A unitary Kraus element.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: CMatrix,
}

impl UnitaryMatrix {
    /// Accepts `u` when `||U^dag U - I||_F <= 1e-10 * N`.
    pub fn new(u: CMatrix) -> Result<Self> {
        Self::with_tolerance(u, 1e-10)
    }

    pub fn with_tolerance(u: CMatrix, per_dim_tol: f64) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::DimensionMismatch {
                expected: u.nrows(),
                found: u.ncols(),
            });
        }
        let deviation = linalg::unitarity_deviation(&u);
        if deviation > per_dim_tol * u.nrows() as f64 {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { entries: u })
    }

    /// Skips the unitarity check. Only for matrices unitary by construction.
    pub(crate) fn new_unchecked(u: CMatrix) -> Self {
        Self { entries: u }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: linalg::identity(dim),
        }
    }

    pub fn haar<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        Ok(Self {
            entries: linalg::haar_unitary(dim, rng)?,
        })
    }

    pub fn pauli(i: usize) -> Self {
        Self {
            entries: linalg::pauli(i),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: linalg::dagger(&self.entries),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            entries: linalg::conj(&self.entries),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            entries: self.entries.t().to_owned(),
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            entries: self.entries.mapv(|z| -z),
        }
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Self {
        Self {
            entries: self.entries.dot(&other.entries),
        }
    }

    pub fn tensor(&self, other: &UnitaryMatrix) -> Self {
        Self {
            entries: linalg::kron(&self.entries, &other.entries),
        }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.entries)
    }

    /// `U A U^dag`.
    pub fn conjugate(&self, a: &CMatrix) -> CMatrix {
        linalg::conjugate_by(&self.entries, a)
    }
}

/// The vector `|psi_A>` on the doubled space of dimension `N^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedState {
    dim: usize,
    amplitudes: CVector,
}

impl VectorizedState {
    /// Wraps raw amplitudes; the length must be a perfect square.
    pub fn from_amplitudes(amplitudes: CVector) -> Result<Self> {
        let len = amplitudes.len();
        let n = (len as f64).sqrt().round() as usize;
        if n * n != len || n == 0 {
            return Err(Error::NotSquareLength { len });
        }
        Ok(Self { dim: n, amplitudes })
    }

    /// `|phi> = N^{-1/2} sum_i |i>|i>`, the vectorized `I / sqrt(N)`.
    pub fn phi(dim: usize) -> Self {
        let mut a = CVector::zeros(dim * dim);
        let s = 1.0 / (dim as f64).sqrt();
        for i in 0..dim {
            a[i * dim + i] = C64::new(s, 0.0);
        }
        Self { dim, amplitudes: a }
    }

    /// Underlying operator dimension `N` (the vector has `N^2` entries).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        linalg::vector_norm(&self.amplitudes)
    }

    pub fn inner(&self, other: &VectorizedState) -> C64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        Ok(Self {
            dim: self.dim,
            amplitudes: self.amplitudes.mapv(|z| z / n),
        })
    }

    pub fn unvec(&self) -> Operator {
        let n = self.dim;
        let m = CMatrix::from_shape_vec((n, n), self.amplitudes.to_vec())
            .expect("length checked at construction");
        Operator { entries: m }
    }
}
