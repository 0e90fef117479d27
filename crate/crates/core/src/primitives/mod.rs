//! Domain types, the seeded random stream and elementary math shared by every
//! other module.

mod math;
mod rng;
mod types;

pub use math::{binary_entropy, db_to_transmittance, transmittance_to_db};
pub use rng::{split_seed, RandomStream};
pub use types::{Basis, IntensityClass, IntensityLabel, Polarization, PulseRecord};
