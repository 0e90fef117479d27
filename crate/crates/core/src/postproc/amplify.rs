//! Privacy amplification to the single-photon secure length.

use bitvec::prelude::*;
use serde::Serialize;

use super::toeplitz::ToeplitzHash;
use crate::error::Result;
use crate::primitives::{binary_entropy, RandomStream};
use crate::protocol::DecoyEstimates;

/// ℓ = ⌊n·Q₁/Q_μ·(1 − H₂(e₁)) − leaked⌋, possibly negative.
pub fn target_length(
    n: usize,
    leaked_bits: u64,
    est: &DecoyEstimates<f64>,
    q_mu: f64,
) -> Result<i64> {
    let h = binary_entropy(est.e1_upper)?;
    let secure = n as f64 * est.q1_lower / q_mu * (1.0 - h) - leaked_bits as f64;
    Ok(secure.floor() as i64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmplifiedKey {
    #[serde(skip)]
    pub key: BitVec<u64, Lsb0>,
    pub target_length: i64,
    /// No secure bits remain; `key` is empty.
    pub empty: bool,
}

/// Compresses the reconciled key with a Toeplitz hash seeded from `seed`.
/// Both parties call this with the same seed and obtain the same key.
pub fn privacy_amplify(
    corrected: &BitSlice<u64, Lsb0>,
    leaked_bits: u64,
    est: &DecoyEstimates<f64>,
    q_mu: f64,
    seed: u64,
) -> Result<AmplifiedKey> {
    let target = target_length(corrected.len(), leaked_bits, est, q_mu)?;
    if target <= 0 {
        return Ok(AmplifiedKey {
            key: BitVec::new(),
            target_length: target,
            empty: true,
        });
    }
    let out_len = target as usize;
    let mut rng = RandomStream::new(seed);
    let hash = ToeplitzHash::from_stream(corrected.len(), out_len, &mut rng);
    Ok(AmplifiedKey {
        key: hash.hash(corrected),
        target_length: target,
        empty: false,
    })
}
