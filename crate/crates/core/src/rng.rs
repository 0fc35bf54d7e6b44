//! Seed derivation for reproducible, parallelism-independent randomness.
//!
//! Every random decision in the pipeline flows from a single `u64` seed.
//! Independent units of work (trees, CV repetitions, simulated
//! participants) each get their own ChaCha8 stream so that work can be
//! scheduled on any number of threads without changing results.
//!
//! Derivation scheme:
//! * `stream_rng(seed, domain, index)` keys ChaCha8 with `seed` and selects
//!   stream `(domain << 48) | index`. Domains partition the stream space so
//!   e.g. tree 3 and repetition 3 never collide.
//! * `mix(seed, a, b)` produces a fresh 64-bit seed via splitmix64 when a
//!   unit of work needs its own full stream space (per-fold forests inside
//!   the CV harness derive their seed this way, then hand out per-tree
//!   streams beneath it).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream-space domains. Values are arbitrary but fixed forever; changing
/// them changes every downstream result.
pub mod domain {
    pub const TREE: u64 = 1;
    pub const BOOTSTRAP_CHECK: u64 = 2;
    pub const CV_PERMUTATION: u64 = 3;
    pub const RANDOM_CLASSIFIER: u64 = 4;
    pub const PARTICIPANT: u64 = 5;
    pub const INSTANCE: u64 = 6;
}

/// Seeded generator on an isolated stream.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    debug_assert!(index < (1 << 48), "stream index overflows domain tag");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 48) | index);
    rng
}

/// Derive a fresh 64-bit seed from a parent seed and two labels
/// (splitmix64 finalizer applied to the xor-folded inputs).
pub fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
