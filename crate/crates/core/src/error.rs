// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary: ||U^dag U - I||_F = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("dimension {dim} is not a power of two")]
    NotPowerOfTwo { dim: usize },

    #[error("vector of length {len} is not the vectorization of a square matrix")]
    NotSquareLength { len: usize },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("dense cap exceeded: {size} > {cap}; use the iterative path")]
    CapExceeded { size: usize, cap: usize },

    #[error("channel has {count} Kraus operators, more than the enumeration limit {limit}")]
    TooManyKraus { count: f64, limit: usize },

    #[error("state is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("channel is not D-regular")]
    NotRegular,

    #[error("circuit error: {0}")]
    Circuit(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("reduction error: {0}")]
    Reduction(String),

    #[error("base expander synthesis failed for seed {seed}: {reason}")]
    Synthesis { seed: u64, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
