//! Decoy-state source and four-detector passive-basis receiver, as per-pulse
//! samplers and as closed-form expectations.

mod analytic;
mod detector;
mod source;

pub use analytic::{analytic_gain_qber, GainQber};
pub use detector::{
    detect, outcome_probabilities, Channel, DetectionEvent, DetectorConfig, DoubleClickPolicy,
    OutcomeProbabilities, Resolution,
};
pub use source::{emit_pulse, PulseSource, SourceConfig};
