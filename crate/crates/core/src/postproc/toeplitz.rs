//! Toeplitz-matrix universal hashing over GF(2).
//!
//! An `ℓ × n` Toeplitz matrix is fixed by `n + ℓ − 1` seed bits `s`; output
//! bit `i` is the parity of `s[i .. i + n]` AND-ed with the reversed input.

use bitvec::prelude::*;
use rayon::prelude::*;

use crate::primitives::RandomStream;

const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzHash {
    input_len: usize,
    output_len: usize,
    seed_bits: BitVec<u64, Lsb0>,
}

impl ToeplitzHash {
    /// Hash with seed bits drawn from `rng`.
    pub fn from_stream(input_len: usize, output_len: usize, rng: &mut RandomStream) -> Self {
        let len = Self::seed_len(input_len, output_len);
        let seed_bits = (0..len).map(|_| rng.bit()).collect();
        Self {
            input_len,
            output_len,
            seed_bits,
        }
    }

    /// Hash from explicit seed bits; `seed_bits.len()` must equal
    /// [`ToeplitzHash::seed_len`].
    pub fn from_seed_bits(
        input_len: usize,
        output_len: usize,
        seed_bits: BitVec<u64, Lsb0>,
    ) -> Self {
        assert_eq!(seed_bits.len(), Self::seed_len(input_len, output_len));
        Self {
            input_len,
            output_len,
            seed_bits,
        }
    }

    pub fn seed_len(input_len: usize, output_len: usize) -> usize {
        if input_len == 0 || output_len == 0 {
            0
        } else {
            input_len + output_len - 1
        }
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn seed_bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.seed_bits
    }

    /// Straightforward bit-by-bit evaluation, kept as the reference.
    pub fn hash_reference(&self, input: &BitSlice<u64, Lsb0>) -> BitVec<u64, Lsb0> {
        assert_eq!(input.len(), self.input_len);
        let n = self.input_len;
        (0..self.output_len)
            .map(|i| {
                input
                    .iter_ones()
                    .fold(false, |acc, j| acc ^ self.seed_bits[i + n - 1 - j])
            })
            .collect()
    }

    /// Word-parallel evaluation, split over output chunks.
    pub fn hash(&self, input: &BitSlice<u64, Lsb0>) -> BitVec<u64, Lsb0> {
        assert_eq!(input.len(), self.input_len);
        let n = self.input_len;
        if n == 0 || self.output_len == 0 {
            return bitvec![u64, Lsb0; 0; self.output_len];
        }
        let reversed: BitVec<u64, Lsb0> = input.iter().by_vals().rev().collect();
        let x_words: Vec<u64> = reversed.as_raw_slice().to_vec();
        let words = x_words.len();
        let last_mask = if n.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (n % 64)) - 1
        };

        // shifted[r][w] holds seed bits r + 64w .. r + 64w + 64.
        let padded_len = self.seed_bits.len() + 256;
        let mut padded = self.seed_bits.clone();
        padded.resize(padded_len, false);
        let shifted: Vec<Vec<u64>> = (0..64)
            .into_par_iter()
            .map(|r| {
                (0..(padded_len - 64 - r) / 64)
                    .map(|w| padded[r + 64 * w..r + 64 * w + 64].load_le::<u64>())
                    .collect()
            })
            .collect();

        let chunks: Vec<Vec<bool>> = (0..self.output_len.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let lo = chunk * CHUNK;
                let hi = (lo + CHUNK).min(self.output_len);
                (lo..hi)
                    .map(|i| {
                        let row = &shifted[i % 64][i / 64..];
                        let mut acc = 0u64;
                        for w in 0..words - 1 {
                            acc ^= row[w] & x_words[w];
                        }
                        acc ^= row[words - 1] & x_words[words - 1] & last_mask;
                        acc.count_ones() & 1 == 1
                    })
                    .collect()
            })
            .collect();
        chunks.into_iter().flatten().collect()
    }
}
