//! Deterministic RNG derivation.
//!
//! Every randomized component receives a ChaCha stream derived from a user
//! seed and a stream index through the fixed splitting rule below, so results
//! are reproducible bit-for-bit regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of the splitmix64 sequence.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with a sequence of labels (row keys, restart indices)
/// into a child seed. Same inputs, same output, on every platform.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = base ^ 0x6A09_E667_F3BC_C908;
    let mut out = splitmix64(&mut state);
    for &p in parts {
        state ^= p.wrapping_mul(0xA076_1D64_78BD_642F);
        out = splitmix64(&mut state);
    }
    out
}

/// Private RNG for stream `stream` of the generator family seeded by `seed`.
pub fn subrng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F);
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
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..8).map(|_| subrng(7, 0).random()).collect();
        let b: Vec<u64> = {
            let mut rng = subrng(7, 0);
            (0..8).map(|_| rng.random()).collect()
        };
        assert_eq!(a[0], b[0]);
        let mut other = subrng(7, 1);
        let c: u64 = other.random();
        assert_ne!(b[0], c);
    }

    #[test]
    fn derive_seed_depends_on_all_parts() {
        let s1 = derive_seed(1, &[2, 3]);
        let s2 = derive_seed(1, &[2, 4]);
        let s3 = derive_seed(1, &[3, 3]);
        assert_ne!(s1, s2);
        assert_ne!(s1, s3);
        assert_eq!(s1, derive_seed(1, &[2, 3]));
    }
}
