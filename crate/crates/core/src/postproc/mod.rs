//! Reconciliation, verification and privacy amplification of sifted keys.

pub mod amplify;
pub mod keyfile;
pub mod ldpc;
pub mod reconcile;
pub mod toeplitz;
pub mod verify;

pub use amplify::{privacy_amplify, target_length, AmplifiedKey};
pub use keyfile::{read_key_file, write_key_file, KeyFileHeader};
pub use reconcile::{
    reconcile, CodeSpec, ReconcileConfig, ReconciliationResult, SiftedKeyPair, DEFAULT_BLOCK_LEN,
    DEFAULT_CODES, MAX_ITERATIONS,
};
pub use toeplitz::ToeplitzHash;
pub use verify::{verification_tag, verify, TAG_BITS};
