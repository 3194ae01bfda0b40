//! Seed-stream helpers.
//!
//! Every source of randomness in a run is a ChaCha8 stream derived from the
//! run seed and a purpose tag, so adding or reordering consumers of one
//! stream never perturbs the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Well-known stream tags. Env workers use `ENV_BASE + env_index`.
pub mod stream {
    pub const POLICY_INIT: u64 = 1;
    pub const VALUE_INIT: u64 = 2;
    pub const ACTIONS: u64 = 3;
    pub const SHUFFLE: u64 = 4;
    pub const EVAL: u64 = 5;
    pub const VERIFIER: u64 = 6;
    pub const ENV_BASE: u64 = 1000;
}

/// An independent deterministic RNG for `(seed, stream)`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
