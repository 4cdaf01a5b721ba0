// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

pub mod channel;
pub mod circuit;
pub mod error;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod protocol;
pub mod reduction;
pub mod rng;
pub mod spectral;
pub mod thermal;

pub use channel::{Channel, KrausElement, KrausStage};
pub use circuit::{Gate, GateCircuit, RegisterLayout};
pub use error::{Error, Result};
pub use operator::{Operator, UnitaryMatrix, VectorizedState};
