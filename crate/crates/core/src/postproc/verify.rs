//! Key verification by 64-bit Toeplitz tags.
//!
//! For any two distinct keys of the same length the tags collide with
//! probability exactly 2⁻⁶⁴ over the choice of seed.

use bitvec::prelude::*;

use super::toeplitz::ToeplitzHash;
use crate::primitives::RandomStream;

pub const TAG_BITS: usize = 64;

pub fn verification_tag(bits: &BitSlice<u64, Lsb0>, seed: u64) -> u64 {
    if bits.is_empty() {
        return 0;
    }
    let mut rng = RandomStream::new(seed);
    let hash = ToeplitzHash::from_stream(bits.len(), TAG_BITS, &mut rng);
    hash.hash(bits).load_le::<u64>()
}

/// Compares seeded tags of both keys. Keys of different length never pass.
pub fn verify(alice: &BitSlice<u64, Lsb0>, bob: &BitSlice<u64, Lsb0>, seed: u64) -> bool {
    alice.len() == bob.len() && verification_tag(alice, seed) == verification_tag(bob, seed)
}
