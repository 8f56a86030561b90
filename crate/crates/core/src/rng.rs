//! Seeded substreams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by the master
//! seed, a purpose tag and an index (usually the trial number). Streams for
//! different `(purpose, index)` pairs are independent, so a computation split
//! across any number of workers draws exactly the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Structure = 1,
    Weights = 2,
    Trial = 3,
    Branching = 4,
    Threshold = 5,
    NullHypothesis = 6,
    PlantedHypothesis = 7,
    Sampling = 8,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `(seed, purpose, index)` into a 64-bit value. Used both to key
/// streams and to derive per-trial seeds that are reported to the user.
pub fn derive_seed(seed: u64, purpose: Purpose, index: u64) -> u64 {
    let mut state = seed;
    let a = splitmix64(&mut state);
    let mut state = a ^ (purpose as u64).wrapping_mul(0xd6e8_feb8_6659_fd93);
    let b = splitmix64(&mut state);
    let mut state = b ^ index.wrapping_mul(0xa076_1d64_78bd_642f);
    splitmix64(&mut state)
}

pub fn substream(seed: u64, purpose: Purpose, index: u64) -> Stream {
    let mut state = derive_seed(seed, purpose, index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_stream() {
        let a: Vec<u64> = substream(7, Purpose::Trial, 3).random_iter().take(4).collect();
        let b: Vec<u64> = substream(7, Purpose::Trial, 3).random_iter().take(4).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn keys_separate_streams() {
        let first = |s: u64, p, i| substream(s, p, i).random::<u64>();
        let base = first(7, Purpose::Trial, 3);
        assert_ne!(base, first(8, Purpose::Trial, 3));
        assert_ne!(base, first(7, Purpose::Weights, 3));
        assert_ne!(base, first(7, Purpose::Trial, 4));
    }
}
