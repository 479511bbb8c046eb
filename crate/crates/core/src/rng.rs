//! Reproducible random streams.
//!
//! Every Monte Carlo replication owns the stream `(seed, scenario_id,
//! replication)`: the ChaCha key is derived from the seed and scenario id,
//! and the replication index selects the ChaCha stream. Streams never
//! overlap and do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one replication of one scenario.
pub fn stream(seed: u64, scenario_id: u64, replication: u64) -> StreamRng {
    let mut key = [0u8; 32];
    let mut s = seed;
    let mut t = scenario_id ^ 0x6a09_e667_f3bc_c908;
    let words = [
        splitmix64(&mut s),
        splitmix64(&mut s),
        splitmix64(&mut t),
        splitmix64(&mut t) ^ seed,
    ];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replication);
    rng
}

/// Stable 64-bit FNV-1a hash, used to turn scenario labels into ids.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
