//! Pinned random number generation.
//!
//! Every stochastic code path uses ChaCha8 from `rand_chacha` 0.3, seeded
//! either directly from a `u64` or through [`derive_rng`]. The generator is
//! platform-independent and its streams are stable across runs, which is
//! what makes fixed-seed replay bit-exact.

use rand::SeedableRng;

/// The one generator used throughout the crate.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Human-readable name of the pinned generator, echoed into output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3)";

/// Stream tags for [`derive_rng`], keeping unrelated draws on disjoint
/// streams of the same master seed.
pub const STREAM_INITIAL_STATE: u64 = 1;
pub const STREAM_DYNAMICS: u64 = 2;

/// Generator seeded directly from a master seed.
pub fn master_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent stream derived from `(master seed, stream, index)`.
///
/// The 32-byte ChaCha seed is the little-endian concatenation of the three
/// values followed by eight zero bytes, so distinct tuples give distinct,
/// reproducible streams. Ensemble runs use `stream` for the grid point and
/// `index` for the trajectory.
pub fn derive_rng(master: u64, stream: u64, index: u64) -> SimRng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&stream.to_le_bytes());
    seed[16..24].copy_from_slice(&index.to_le_bytes());
    SimRng::from_seed(seed)
}
