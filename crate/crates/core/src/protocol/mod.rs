//! Session simulation, decoy-state estimation and the secure key rate.

pub mod decoy;
pub mod gains;
pub mod keyrate;
pub mod report;
pub mod session;
pub mod tally;

pub use decoy::{decoy_bounds, DecoyEstimates, DecoyInputs};
pub use gains::{estimate_gains, ClassEstimate, GainEstimates, GainNormalization};
pub use keyrate::{secure_key_rate, SecureKeyRate, BASIS_FACTOR, DEFAULT_EC_INEFFICIENCY};
pub use report::{key_rate_report, KeyRateReport, RateParameters, CSV_HEADER};
pub use session::{
    run_session, run_session_with_key, EfficiencyConvention, SamplingMode, SessionConfig,
    SessionOutput, SiftedSignalBits, DEFAULT_BLOCK_CYCLES,
};
pub use tally::{ClassTally, TallySet};
