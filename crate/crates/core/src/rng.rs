//! Seed derivation and per-row random streams.
//!
//! Every matrix row draws from its own ChaCha stream keyed by
//! `(seed, matrix id, row)`, so fills are independent of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Child seed for `(tag, index)` under `seed`.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index)
}

/// Stream for row `row` of matrix `matrix_id`.
pub fn row_stream(seed: u64, matrix_id: u32, row: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((matrix_id as u64) << 32) | row as u64);
    rng
}

/// General-purpose stream for auxiliary draws (test vectors, GOE trials).
pub fn aux_stream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, 0))
}
