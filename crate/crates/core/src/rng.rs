//! Counter-based random streams.
//!
//! Every independent unit of work (a fold, a restart, one SIR run from one
//! seed node) draws from its own ChaCha stream keyed by the master seed and a
//! tuple of counters. Results therefore do not depend on scheduling order or
//! worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep streams of different subsystems apart.
pub mod domain {
    pub const FOLD_SPLIT: u64 = 1;
    pub const NEGATIVE_SAMPLING: u64 = 2;
    pub const KMEANS: u64 = 3;
    pub const NMF: u64 = 4;
    pub const LOUVAIN: u64 = 5;
    pub const SIR_INFLUENCE: u64 = 6;
    pub const SIR_THRESHOLD: u64 = 7;
    pub const REPLICATE: u64 = 8;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic RNG for the unit identified by `counters` under `seed`.
pub fn stream_rng(seed: u64, counters: &[u64]) -> ChaCha8Rng {
    let stream = counters
        .iter()
        .fold(0x6879_7065_726d_696eu64, |h, &c| splitmix(h ^ splitmix(c)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
