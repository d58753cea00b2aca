//! Counter-based random streams.
//!
//! Every path owns a dedicated ChaCha stream keyed by `(seed, path_index)`,
//! so an ensemble is a pure function of `(seed, grid, n_paths)` no matter how
//! work is scheduled across workers. Bootstrap resampling and other auxiliary
//! draws use reserved stream offsets so they never collide with path streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Streams below this offset are reserved for path generation.
const AUX_STREAM_BASE: u64 = 1 << 48;

/// RNG for path `path_index` of the ensemble keyed by `seed`.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    debug_assert!(path_index < AUX_STREAM_BASE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// RNG for auxiliary draws (bootstrap resamples, synthetic inputs).
pub fn aux_rng(seed: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(AUX_STREAM_BASE + slot);
    rng
}
