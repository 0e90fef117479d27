//! Daylight free-space decoy-state BB84: link budget, photon-level session
//! simulation, decoy-state estimation, post-processing and orbit sunlight
//! statistics.
//!
//! The analytic modules are generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix them to `f64`, with `F32*` variants where single
//! precision is useful.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constellation;
pub mod error;
pub mod linkbudget;
pub mod photonics;
pub mod pipeline;
pub mod postproc;
pub mod primitives;
pub mod protocol;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result, ValidationIssue};
pub use primitives::RandomStream;

pub type LinkParams = linkbudget::LinkParams<f64>;
pub type BackgroundEnvironment = linkbudget::BackgroundEnvironment<f64>;
pub type LinkBudget = linkbudget::LinkBudget<f64>;
pub type DecoyInputs = protocol::DecoyInputs<f64>;
pub type DecoyEstimates = protocol::DecoyEstimates<f64>;
pub type SecureKeyRate = protocol::SecureKeyRate<f64>;
pub type GainQber = photonics::GainQber<f64>;
pub type OrbitSpec = constellation::OrbitSpec<f64>;
pub type BetaProfile = constellation::BetaProfile<f64>;

pub type F32LinkParams = linkbudget::LinkParams<f32>;
pub type F32DecoyInputs = protocol::DecoyInputs<f32>;
pub type F32DecoyEstimates = protocol::DecoyEstimates<f32>;
pub type F32OrbitSpec = constellation::OrbitSpec<f32>;
