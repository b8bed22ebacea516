//! Seeded randomness. Every protocol run is replayable from `(seed, config)`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SimRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent stream for session `index` under a master seed, so parallel
/// sessions never share generator state and results don't depend on thread
/// scheduling.
pub fn session_rng(master: u64, index: u64) -> SimRng {
    let mut r = ChaCha20Rng::seed_from_u64(master);
    r.set_stream(index.wrapping_add(1));
    r
}
