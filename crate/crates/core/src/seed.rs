//! Counter-based seed derivation.
//!
//! Every stochastic step draws from its own generator seeded with
//! `derive(master, stream, index)`. The child seed depends only on the three
//! integers, so work can be split across threads in any order without
//! changing a single random draw.
//!
//! The mixing function is SplitMix64's finalizer applied to
//! `master`, then `stream`, then `index`, each folded in with the golden-ratio
//! increment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Named streams keep unrelated consumers of one master seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Grid = 1,
    Enumeration = 2,
    Placement = 3,
    Dataset = 4,
    Schedule = 5,
    Folds = 6,
    Split = 7,
    Equivalence = 8,
    Noise = 9,
    Excitation = 10,
    History = 11,
}

pub fn derive(master: u64, stream: Stream, index: u64) -> u64 {
    let a = mix(master.wrapping_add(GOLDEN));
    let b = mix(a ^ (stream as u64).wrapping_mul(GOLDEN));
    mix(b ^ index.wrapping_add(1).wrapping_mul(GOLDEN))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    rng(derive(master, stream, index))
}
