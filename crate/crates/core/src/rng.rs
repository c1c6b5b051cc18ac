//! Seed derivation for every random stream in a run.
//!
//! All streams are derived from a master seed and a `(purpose, id, loop)`
//! triple, so the order in which work items are scheduled can never change
//! the numbers any of them draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate.
pub type SimRng = ChaCha8Rng;

/// What a derived stream is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    /// Per-pair DE mutation/crossover draws.
    Optimize = 1,
    /// Rollout seeds for DE fitness evaluation.
    Fitness = 2,
    /// Champion re-evaluation on its own level.
    Reevaluate = 3,
    /// Level mutation of a parent.
    Mutate = 4,
    /// Playability gate for a candidate level.
    Gate = 5,
    /// All-pairs transfer evaluation.
    Transfer = 6,
    /// DE population re-seeding after a transfer.
    TransferReseed = 7,
    /// Initial population of the seed pair.
    Init = 8,
    /// Parent selection coin flips during reproduction.
    Reproduce = 9,
    /// Curriculum stage sampling and training.
    Curriculum = 10,
}

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a 64-bit seed from the master seed and a `(purpose, id, loop)` triple.
pub fn derive_seed(master: u64, purpose: Purpose, id: u64, loop_index: u64) -> u64 {
    let mut h = mix64(master);
    h = mix64(h ^ purpose as u64);
    h = mix64(h ^ id);
    mix64(h ^ loop_index)
}

/// Combine an existing seed with one more index (e.g. episode number).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ index)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn derive_rng(master: u64, purpose: Purpose, id: u64, loop_index: u64) -> SimRng {
    rng_from_seed(derive_seed(master, purpose, id, loop_index))
}
