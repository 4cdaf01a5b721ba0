// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex linear-algebra helpers shared by every module.
//!
//! Matrices are `ndarray` arrays of `Complex64`. Factorizations (QR, SVD,
//! Hermitian eigensolvers) are delegated to LAPACK through `ndarray-linalg`.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::QR;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;

pub type C64 = Complex64;
pub type CMatrix = Array2<C64>;
pub type CVector = Array1<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    Array2::from_diag_elem(n, ONE)
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

pub fn conj(a: &CMatrix) -> CMatrix {
    a.mapv(|z| z.conj())
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diag().sum()
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a|b>` with the first argument conjugated.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMatrix::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &x| *o = s * x);
        }
    }
    out
}

/// `U A U^dag`.
pub fn conjugate_by(u: &CMatrix, a: &CMatrix) -> CMatrix {
    u.dot(a).dot(&dagger(u))
}

/// Pauli matrix `sigma_i`, i in 0..4 with sigma_0 = identity.
pub fn pauli(i: usize) -> CMatrix {
    match i {
        0 => ndarray::array![[ONE, ZERO], [ZERO, ONE]],
        1 => ndarray::array![[ZERO, ONE], [ONE, ZERO]],
        2 => ndarray::array![[ZERO, -I], [I, ZERO]],
        3 => ndarray::array![[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("pauli index {i} out of range"),
    }
}

/// Max-abs entrywise distance.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `||U^dag U - I||_F`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    frobenius_distance(&dagger(u).dot(u), &identity(n))
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_shape_simple_fn((rows, cols), || {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_complex_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_shape_simple_fn(len, || {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    let g = random_complex_matrix(n, n, rng);
    let (mut q, r) = g.qr()?;
    for (k, mut col) in q.axis_iter_mut(Axis(1)).enumerate() {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        col.mapv_inplace(|z| z * phase);
    }
    Ok(q)
}

/// `exp(i t H)` for a Hermitian `H`.
pub fn unitary_from_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    use ndarray_linalg::{Eigh, UPLO};
    let (vals, vecs) = h.eigh(UPLO::Upper)?;
    let n = h.nrows();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let phase = C64::from_polar(1.0, t * vals[k]);
        scaled.column_mut(k).mapv_inplace(|z| z * phase);
    }
    Ok(scaled.dot(&dagger(&vecs)))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_complex_matrix(n, n, rng);
    (&g + &dagger(&g)).mapv(|z| z * 0.5)
}

/// Integer log2 for exact powers of two.
pub fn log2_exact(n: usize) -> Option<usize> {
    if n.is_power_of_two() {
        Some(n.trailing_zeros() as usize)
    } else {
        None
    }
}
