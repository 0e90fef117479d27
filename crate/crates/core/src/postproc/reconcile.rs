//! Block-wise syndrome reconciliation with a fixed family of LDPC codes.

use bitvec::prelude::*;
use rayon::prelude::*;
use serde::Serialize;

use super::ldpc::{decode_syndrome, ParityCheckMatrix};
use super::verify::{verification_tag, TAG_BITS};
use crate::error::{Error, Result};
use crate::primitives::{binary_entropy, split_seed, RandomStream};

/// Smallest block; longer keys are split into equal blocks of at least this.
pub const DEFAULT_BLOCK_LEN: usize = 65_536;
pub const MAX_ITERATIONS: usize = 60;

/// One member of the code family: rate, variable-node degree profile (node
/// fractions) and the largest QBER it is used for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeSpec {
    pub rate: f64,
    pub var_degrees: &'static [(usize, f64)],
    pub max_qber: f64,
}

const HIGH_DEGREES: [(usize, f64); 7] = [
    (4, 0.0109),
    (5, 0.1249),
    (8, 0.0591),
    (10, 0.0614),
    (13, 0.0915),
    (20, 0.0372),
    (25, 0.0052),
];

const fn profile(d2: f64, d3: f64) -> [(usize, f64); 9] {
    let h = HIGH_DEGREES;
    [(2, d2), (3, d3), h[0], h[1], h[2], h[3], h[4], h[5], h[6]]
}

const RATE_90: [(usize, f64); 9] = profile(0.099, 0.5109);
const RATE_85: [(usize, f64); 9] = profile(0.149, 0.4609);

pub const DEFAULT_CODES: &[CodeSpec] = &[
    CodeSpec {
        rate: 0.90,
        var_degrees: &RATE_90,
        max_qber: 0.0085,
    },
    CodeSpec {
        rate: 0.85,
        var_degrees: &RATE_85,
        max_qber: 0.017,
    },
    CodeSpec {
        rate: 0.80,
        var_degrees: &RATE_85,
        max_qber: 0.025,
    },
];

impl CodeSpec {
    pub fn syndrome_len(&self, block_len: usize) -> usize {
        ((1.0 - self.rate) * block_len as f64).round() as usize
    }

    /// Variable degrees for a block of `block_len`, ascending.
    pub fn degree_sequence(&self, block_len: usize) -> Vec<usize> {
        let total: f64 = self.var_degrees.iter().map(|&(_, f)| f).sum();
        let mut out = Vec::with_capacity(block_len);
        let mut acc = 0.0;
        for &(d, f) in self.var_degrees {
            acc += f / total;
            let upto = ((acc * block_len as f64).round() as usize).min(block_len);
            out.resize(upto.max(out.len()), d);
        }
        let last = self.var_degrees.last().map_or(3, |&(d, _)| d);
        out.resize(block_len, last);
        out.sort_unstable();
        out
    }

    pub fn build(&self, block_len: usize, seed: u64) -> ParityCheckMatrix {
        ParityCheckMatrix::random_with_degrees(
            self.syndrome_len(block_len),
            &self.degree_sequence(block_len),
            seed,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconcileConfig {
    pub block_len: usize,
    pub max_iterations: usize,
    pub codes: Vec<CodeSpec>,
    /// Seeds the public code construction.
    pub code_seed: u64,
    /// Seeds the public verification hash.
    pub verify_seed: u64,
}

impl Default for ReconcileConfig {
    fn default() -> Self {
        Self {
            block_len: DEFAULT_BLOCK_LEN,
            max_iterations: MAX_ITERATIONS,
            codes: DEFAULT_CODES.to_vec(),
            code_seed: 0x5eed_c0de,
            verify_seed: 0x7a9_5eed,
        }
    }
}

impl ReconcileConfig {
    /// Highest-rate code rated for `qber`.
    pub fn select(&self, qber: f64) -> Option<&CodeSpec> {
        self.codes
            .iter()
            .filter(|c| qber <= c.max_qber)
            .max_by(|a, b| a.rate.total_cmp(&b.rate))
    }

    pub fn qber_limit(&self) -> f64 {
        self.codes.iter().map(|c| c.max_qber).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiftedKeyPair {
    pub alice_bits: BitVec<u64, Lsb0>,
    pub bob_bits: BitVec<u64, Lsb0>,
    pub qber_estimate: f64,
}

impl SiftedKeyPair {
    pub fn new(
        alice_bits: BitVec<u64, Lsb0>,
        bob_bits: BitVec<u64, Lsb0>,
        qber_estimate: f64,
    ) -> Result<Self> {
        if alice_bits.len() != bob_bits.len() {
            return Err(Error::LengthMismatch {
                alice: alice_bits.len(),
                bob: bob_bits.len(),
            });
        }
        Ok(Self {
            alice_bits,
            bob_bits,
            qber_estimate,
        })
    }

    /// Uniform key for Alice; Bob's copy goes through a binary symmetric
    /// channel with crossover `qber`, which is also the estimate.
    pub fn simulate(n: usize, qber: f64, rng: &mut RandomStream) -> Self {
        let alice: BitVec<u64, Lsb0> = (0..n).map(|_| rng.bit()).collect();
        let bob = alice
            .iter()
            .by_vals()
            .map(|b| b ^ rng.bernoulli(qber))
            .collect();
        Self {
            alice_bits: alice,
            bob_bits: bob,
            qber_estimate: qber,
        }
    }

    pub fn len(&self) -> usize {
        self.alice_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice_bits.is_empty()
    }

    pub fn observed_qber(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (self.alice_bits.clone() ^ self.bob_bits.clone()).count_ones() as f64 / self.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconciliationResult {
    /// Alice's bits from the blocks Bob decoded.
    #[serde(skip)]
    pub alice_bits: BitVec<u64, Lsb0>,
    /// Bob's corrected bits, same blocks.
    #[serde(skip)]
    pub corrected_bits: BitVec<u64, Lsb0>,
    /// Syndromes of every attempted block plus the tags of decoded blocks.
    pub leaked_bits: u64,
    pub syndrome_bits: u64,
    pub tag_bits: u64,
    /// leaked / (processed · H₂(qber_estimate)); absent at zero QBER.
    pub achieved_f: Option<f64>,
    pub success: bool,
    pub code_rate: f64,
    pub block_len: usize,
    pub blocks: usize,
    /// Blocks that did not converge or whose tags disagreed.
    pub failed_blocks: usize,
    /// Converged blocks rejected by the tag comparison.
    pub tag_mismatches: usize,
    pub processed_bits: usize,
    /// Trailing bits left over after splitting into equal blocks.
    pub dropped_bits: usize,
}

pub fn reconcile(pair: &SiftedKeyPair, cfg: &ReconcileConfig) -> Result<ReconciliationResult> {
    if pair.alice_bits.len() != pair.bob_bits.len() {
        return Err(Error::LengthMismatch {
            alice: pair.alice_bits.len(),
            bob: pair.bob_bits.len(),
        });
    }
    let qber = pair.qber_estimate;
    if !(0.0..0.5).contains(&qber) {
        return Err(Error::ReconciliationRefused {
            qber,
            limit: cfg.qber_limit(),
        });
    }
    let code = *cfg.select(qber).ok_or(Error::ReconciliationRefused {
        qber,
        limit: cfg.qber_limit(),
    })?;
    if pair.len() < cfg.block_len {
        return Err(Error::KeyTooShort {
            len: pair.len(),
            block: cfg.block_len,
        });
    }
    let blocks = pair.len() / cfg.block_len;
    let n = pair.len() / blocks;
    let h = code.build(n, cfg.code_seed);
    let crossover = qber.max(1e-4);

    let decoded: Vec<Option<(BitVec<u64, Lsb0>, bool)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let alice = &pair.alice_bits[b * n..(b + 1) * n];
            let bob = &pair.bob_bits[b * n..(b + 1) * n];
            let syndrome = h.syndrome(alice);
            let out = decode_syndrome(&h, bob, &syndrome, crossover, cfg.max_iterations);
            out.converged.then(|| {
                let seed = split_seed(cfg.verify_seed, b as u64);
                let agree = verification_tag(alice, seed) == verification_tag(&out.bits, seed);
                (out.bits, agree)
            })
        })
        .collect();

    let mut alice_bits = BitVec::new();
    let mut corrected_bits = BitVec::new();
    let (mut failed_blocks, mut tag_mismatches, mut tagged) = (0, 0, 0);
    for (b, d) in decoded.into_iter().enumerate() {
        match d {
            Some((bits, true)) => {
                tagged += 1;
                alice_bits.extend_from_bitslice(&pair.alice_bits[b * n..(b + 1) * n]);
                corrected_bits.extend_from_bitslice(&bits);
            }
            Some((_, false)) => {
                tagged += 1;
                tag_mismatches += 1;
                failed_blocks += 1;
            }
            None => failed_blocks += 1,
        }
    }

    let syndrome_bits = (blocks * h.syndrome_len()) as u64;
    let tag_bits = (tagged * TAG_BITS) as u64;
    let leaked_bits = syndrome_bits + tag_bits;
    let processed_bits = blocks * n;
    let entropy = binary_entropy(qber)?;
    let achieved_f =
        (entropy > 0.0).then(|| leaked_bits as f64 / (processed_bits as f64 * entropy));
    let success = !corrected_bits.is_empty();

    Ok(ReconciliationResult {
        alice_bits,
        corrected_bits,
        leaked_bits,
        syndrome_bits,
        tag_bits,
        achieved_f,
        success,
        code_rate: code.rate,
        block_len: n,
        blocks,
        failed_blocks,
        tag_mismatches,
        processed_bits,
        dropped_bits: pair.len() - processed_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_sequence_has_block_length() {
        for code in DEFAULT_CODES {
            for n in [100, 4096, 10_000] {
                let d = code.degree_sequence(n);
                assert_eq!(d.len(), n);
                assert!(d.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn selection_prefers_highest_rate() {
        let cfg = ReconcileConfig::default();
        assert_eq!(cfg.select(0.0).unwrap().rate, 0.90);
        assert_eq!(cfg.select(0.0165).unwrap().rate, 0.85);
        assert_eq!(cfg.select(0.02).unwrap().rate, 0.80);
        assert!(cfg.select(0.2).is_none());
    }

    fn small_blocks() -> ReconcileConfig {
        ReconcileConfig {
            block_len: 4096,
            ..ReconcileConfig::default()
        }
    }

    #[test]
    fn identical_keys_leak_only_syndromes_and_tags() {
        let mut rng = RandomStream::new(1);
        let pair = SiftedKeyPair::simulate(3 * 4096 + 10, 0.0, &mut rng);
        let r = reconcile(&pair, &small_blocks()).unwrap();
        assert!(r.success);
        assert_eq!(r.failed_blocks, 0);
        assert_eq!(r.block_len, 4099);
        assert_eq!(r.dropped_bits, 1);
        assert_eq!(r.corrected_bits, pair.alice_bits[..3 * 4099]);
        let m = DEFAULT_CODES[0].syndrome_len(4099) as u64;
        assert_eq!(r.syndrome_bits, 3 * m);
        assert_eq!(r.leaked_bits, 3 * m + 3 * 64);
        assert_eq!(r.achieved_f, None);
    }

    #[test]
    fn blocks_split_evenly() {
        let mut rng = RandomStream::new(5);
        let pair = SiftedKeyPair::simulate(2 * DEFAULT_BLOCK_LEN + 1001, 0.0, &mut rng);
        let r = reconcile(&pair, &ReconcileConfig::default()).unwrap();
        assert_eq!(r.blocks, 2);
        assert_eq!(r.block_len, DEFAULT_BLOCK_LEN + 500);
        assert_eq!(r.dropped_bits, 1);
        assert_eq!(r.processed_bits + r.dropped_bits, pair.len());
    }

    #[test]
    fn half_qber_refused() {
        let mut rng = RandomStream::new(2);
        let pair = SiftedKeyPair::simulate(5000, 0.5, &mut rng);
        assert!(matches!(
            reconcile(&pair, &ReconcileConfig::default()),
            Err(Error::ReconciliationRefused { .. })
        ));
    }

    #[test]
    fn short_and_mismatched_keys_rejected() {
        let mut rng = RandomStream::new(3);
        let pair = SiftedKeyPair::simulate(100, 0.01, &mut rng);
        assert!(matches!(
            reconcile(&pair, &ReconcileConfig::default()),
            Err(Error::KeyTooShort { .. })
        ));
        assert!(
            SiftedKeyPair::new(bitvec![u64, Lsb0; 0; 3], bitvec![u64, Lsb0; 0; 4], 0.0).is_err()
        );
    }

    #[test]
    fn low_qber_corrects_exactly() {
        let mut rng = RandomStream::new(4);
        let pair = SiftedKeyPair::simulate(4 * 4096, 0.003, &mut rng);
        let r = reconcile(&pair, &small_blocks()).unwrap();
        assert!(r.success);
        assert_eq!(r.failed_blocks, 0);
        assert_eq!(r.corrected_bits, r.alice_bits);
        assert!(r.achieved_f.unwrap() > 1.0);
    }
}
