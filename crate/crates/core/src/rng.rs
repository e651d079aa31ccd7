//! Deterministic RNG streams.
//!
//! Every randomized component takes an explicit generator. Experiments derive
//! one stream per trial from `(seed, trial)` so trials can run concurrently
//! and replays are bit-identical.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Counter-based generator seeded from a 64-bit seed.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-trial stream: `seed XOR trial_index` into the counter-based generator.
pub fn trial_stream(seed: u64, trial: u64) -> ChaCha8Rng {
    stream(seed ^ trial)
}
