//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a generator keyed by a tuple of
//! integers (seed, cycle, qubit) or (seed, shot, stream). The draw therefore
//! depends only on its key, never on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags used to separate independent draws belonging to one shot.
pub mod stream {
    pub const OUTCOME: u64 = 0;
    pub const SELECT: u64 = 1;
    pub const FAULTS: u64 = 2;
    pub const READOUT: u64 = 3;
    pub const GATES: u64 = 4;
    pub const RESTART: u64 = 5;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic generator for the given key.
pub fn keyed(key: &[u64]) -> ChaCha8Rng {
    let mut state = 0x243F_6A88_85A3_08D3u64 ^ (key.len() as u64);
    for &k in key {
        let mut s = state ^ k;
        state = splitmix64(&mut s);
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
