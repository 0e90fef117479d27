//! Binary final-key files.
//!
//! Layout (little endian): magic `DQKY`, version `u16`, reserved `u16`,
//! key length in bits `u64`, seed fingerprint `[u8; 8]`, then the key bits
//! packed eight per byte, least significant bit first.

use std::io::{Read, Write};
use std::path::Path;

use bitvec::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"DQKY";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyFileHeader {
    pub version: u16,
    pub length_bits: u64,
    pub seed_fingerprint: [u8; 8],
}

/// First eight bytes of SHA-256 over the little-endian seed.
pub fn seed_fingerprint(seed: u64) -> [u8; 8] {
    let digest = Sha256::digest(seed.to_le_bytes());
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    out
}

pub fn encode_key(key: &BitSlice<u64, Lsb0>, seed: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + key.len().div_ceil(8));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(key.len() as u64).to_le_bytes());
    out.extend_from_slice(&seed_fingerprint(seed));
    for chunk in key.chunks(8) {
        out.push(
            chunk
                .iter()
                .by_vals()
                .enumerate()
                .fold(0u8, |b, (i, bit)| b | (u8::from(bit) << i)),
        );
    }
    out
}

pub fn decode_key(bytes: &[u8]) -> Result<(KeyFileHeader, BitVec<u64, Lsb0>)> {
    let bad = |msg: &str| Error::KeyFormat(msg.to_string());
    if bytes.len() < HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if bytes[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::KeyFormat(format!("unsupported version {version}")));
    }
    let length_bits = u64::from_le_bytes(bytes[8..16].try_into().expect("eight bytes"));
    let mut seed_fingerprint = [0u8; 8];
    seed_fingerprint.copy_from_slice(&bytes[16..24]);
    let body = &bytes[HEADER_LEN..];
    let len = usize::try_from(length_bits).map_err(|_| bad("length overflow"))?;
    if body.len() != len.div_ceil(8) {
        return Err(bad("body length does not match header"));
    }
    let mut key = BitVec::with_capacity(len);
    key.extend((0..len).map(|i| body[i / 8] >> (i % 8) & 1 == 1));
    Ok((
        KeyFileHeader {
            version,
            length_bits,
            seed_fingerprint,
        },
        key,
    ))
}

pub fn write_key_file(path: &Path, key: &BitSlice<u64, Lsb0>, seed: u64) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_key(key, seed))?;
    Ok(())
}

pub fn read_key_file(path: &Path) -> Result<(KeyFileHeader, BitVec<u64, Lsb0>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_key(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let key = bitvec![u64, Lsb0; 1, 0, 1, 1, 0, 0, 0, 0, 1];
        let bytes = encode_key(&key, 7);
        assert_eq!(&bytes[..4], b"DQKY");
        assert_eq!(bytes.len(), HEADER_LEN + 2);
        assert_eq!(bytes[HEADER_LEN], 0b0000_1101);
        assert_eq!(bytes[HEADER_LEN + 1], 0b1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 9);
    }

    #[test]
    fn corrupt_files_rejected() {
        let bytes = encode_key(&bitvec![u64, Lsb0; 1; 20], 1);
        assert!(decode_key(&bytes[..10]).is_err());
        assert!(decode_key(&bytes[..bytes.len() - 1]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(decode_key(&wrong).is_err());
        let mut future = bytes;
        future[4] = 9;
        assert!(decode_key(&future).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.key");
        let key = bitvec![u64, Lsb0; 0, 1, 1, 0, 1];
        write_key_file(&path, &key, 99).unwrap();
        let (header, back) = read_key_file(&path).unwrap();
        assert_eq!(back, key);
        assert_eq!(header.length_bits, 5);
        assert_eq!(header.seed_fingerprint, seed_fingerprint(99));
        assert_ne!(seed_fingerprint(99), seed_fingerprint(100));
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..300), seed in any::<u64>()) {
            let key: BitVec<u64, Lsb0> = bits.into_iter().collect();
            let (header, back) = decode_key(&encode_key(&key, seed)).unwrap();
            prop_assert_eq!(back, key);
            prop_assert_eq!(header.version, VERSION);
        }
    }
}
