//! Deterministic random stream derivation for search drivers.
//!
//! Every trial owns an independent ChaCha8 stream derived from the run seed
//! and the trial index alone, so parallel and serial executions consume
//! identical randomness and any subset of a grid reproduces the full run's
//! per-trial draws.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// SplitMix64 output function.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial generator: ChaCha8 seeded with
/// `splitmix64(splitmix64(seed) ^ (trial + 1))`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed) ^ trial.wrapping_add(1)))
}
