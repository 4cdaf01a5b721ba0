// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded, splittable randomness.
//!
//! Every random draw in the crate comes from a ChaCha20 generator keyed by a
//! single 64-bit seed. Independent streams are selected with ChaCha's 64-bit
//! stream id, derived from a list of labels by SplitMix64 folding, so a
//! sub-computation identified by `(seed, labels)` always sees the same bits
//! regardless of evaluation order or thread schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stream id for a label path.
pub fn stream_id(labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(0x5851_F42D_4C95_7F2D, |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

/// Generator for the stream `(seed, labels)`.
pub fn stream(seed: u64, labels: &[u64]) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(labels));
    rng
}

// Labels for the top-level consumers, kept distinct so that e.g. a gap
// computation and a protocol run sharing a seed do not share bits.
pub const LABEL_POWER_ITERATION: u64 = 1;
pub const LABEL_HADAMARD: u64 = 2;
pub const LABEL_ORTHOGONALITY: u64 = 3;
pub const LABEL_SYNTHESIS: u64 = 4;
