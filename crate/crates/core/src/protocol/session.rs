//! Session engine: emission, channel, detection and basis sifting over
//! `clock_rate × duration` cycles, split into independently seeded blocks.

use bitvec::prelude::*;
use rand::seq::index;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tally::{ClassTally, TallySet};
use crate::error::{Error, Result, ValidationIssue};
use crate::photonics::{
    detect, outcome_probabilities, Channel, DetectorConfig, OutcomeProbabilities, PulseSource,
    Resolution, SourceConfig,
};
use crate::primitives::{IntensityLabel, RandomStream};

pub const DEFAULT_BLOCK_CYCLES: u64 = 10_000_000;

/// Where the detector efficiency is accounted for. Exactly one place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyConvention {
    /// Applied by the detector model; the link carries no detection loss.
    #[default]
    Detector,
    /// Folded into the link's detection loss; the detector model uses 1.
    Link,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Per-block multinomial sampling of outcome counts from the exact
    /// per-pulse outcome distribution.
    #[default]
    Aggregate,
    /// Every pulse is emitted, transmitted and detected photon by photon.
    PerPulse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub source: SourceConfig,
    pub detector: DetectorConfig,
    /// `channel.transmittance` is the link transmittance; the detector
    /// efficiency is applied on top according to `efficiency_convention`.
    pub channel: Channel,
    pub efficiency_convention: EfficiencyConvention,
    pub duration_s: f64,
    pub sampling: SamplingMode,
    /// Per-block log-normal loss jitter (σ in dB). Zero disables it.
    pub loss_fluctuation_sigma_db: f64,
    pub block_cycles: u64,
}

impl SessionConfig {
    pub fn cycles(&self) -> u64 {
        (self.source.clock_rate_hz * self.duration_s).round() as u64
    }

    /// Per-photon survival probability seen by the detector model.
    pub fn photon_transmittance(&self) -> f64 {
        match self.efficiency_convention {
            EfficiencyConvention::Detector => self.channel.transmittance * self.detector.efficiency,
            EfficiencyConvention::Link => self.channel.transmittance,
        }
    }

    pub fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = self.source.issues();
        out.extend(self.detector.issues());
        if self.efficiency_convention == EfficiencyConvention::Link
            && self.detector.efficiency != 1.0
        {
            out.push(ValidationIssue::new(
                "detector.efficiency",
                "efficiency is already counted in the link detection loss; set it to 1 or use the detector convention",
            ));
        }
        let unit = [
            ("link.transmittance", self.channel.transmittance),
            (
                "background.click_probability",
                self.channel.background_click_prob,
            ),
            (
                "detector.misalignment_error",
                self.channel.misalignment_error,
            ),
        ];
        for (field, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                out.push(ValidationIssue::new(field, "must lie in [0, 1]"));
            }
        }
        if !(self.duration_s >= 0.0) {
            out.push(ValidationIssue::new("protocol.duration_s", "must be >= 0"));
        }
        if !(self.loss_fluctuation_sigma_db >= 0.0) {
            out.push(ValidationIssue::new(
                "link.loss_fluctuation_sigma_db",
                "must be >= 0",
            ));
        }
        if self.block_cycles == 0 {
            out.push(ValidationIssue::new("protocol.block_cycles", "must be > 0"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }

    fn block_channel(&self, rng: &mut RandomStream) -> Channel {
        let mut ch = self.channel;
        ch.transmittance = self.photon_transmittance();
        if self.loss_fluctuation_sigma_db > 0.0 {
            let jitter_db = Normal::new(0.0, self.loss_fluctuation_sigma_db)
                .expect("finite sigma")
                .sample(rng);
            ch.transmittance = (ch.transmittance * 10f64.powf(-jitter_db / 10.0)).min(1.0);
        }
        ch
    }
}

/// Sifted signal-class bits from both ends.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiftedSignalBits {
    pub alice: BitVec<u64, Lsb0>,
    pub bob: BitVec<u64, Lsb0>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutput {
    pub tally: TallySet,
    pub signal_bits: SiftedSignalBits,
}

pub fn run_session(cfg: &SessionConfig, seed: u64) -> Result<TallySet> {
    Ok(simulate(cfg, seed, false)?.tally)
}

/// Like [`run_session`], also returning the sifted signal-class key material.
pub fn run_session_with_key(cfg: &SessionConfig, seed: u64) -> Result<SessionOutput> {
    simulate(cfg, seed, true)
}

fn simulate(cfg: &SessionConfig, seed: u64, keep_bits: bool) -> Result<SessionOutput> {
    cfg.validate()?;
    let source = PulseSource::new(cfg.source.clone())?;
    let total = cfg.cycles();
    let blocks = total.div_ceil(cfg.block_cycles);
    let master = RandomStream::new(seed);

    let results: Vec<(TallySet, SiftedSignalBits)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * cfg.block_cycles;
            let cycles = cfg.block_cycles.min(total - start);
            let mut rng = master.split(b);
            let channel = cfg.block_channel(&mut rng);
            match cfg.sampling {
                SamplingMode::Aggregate => {
                    aggregate_block(cfg, &channel, cycles, &mut rng, keep_bits)
                }
                SamplingMode::PerPulse => {
                    per_pulse_block(cfg, &source, &channel, start, cycles, &mut rng, keep_bits)
                }
            }
        })
        .collect();

    let mut out = SessionOutput {
        tally: TallySet::default(),
        signal_bits: SiftedSignalBits::default(),
    };
    for (tally, bits) in results {
        out.tally += tally;
        out.signal_bits.alice.extend_from_bitslice(&bits.alice);
        out.signal_bits.bob.extend_from_bitslice(&bits.bob);
    }
    Ok(out)
}

fn binomial(rng: &mut RandomStream, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Multinomial draw by sequential conditional binomials.
fn multinomial<const K: usize>(rng: &mut RandomStream, n: u64, probs: [f64; K]) -> [u64; K] {
    let mut out = [0u64; K];
    let mut remaining = n;
    let mut mass = 1.0;
    for k in 0..K - 1 {
        let p = if mass > 0.0 {
            (probs[k] / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out[k] = binomial(rng, remaining, p);
        remaining -= out[k];
        mass -= probs[k];
    }
    out[K - 1] = remaining;
    out
}

fn aggregate_block(
    cfg: &SessionConfig,
    channel: &Channel,
    cycles: u64,
    rng: &mut RandomStream,
    keep_bits: bool,
) -> (TallySet, SiftedSignalBits) {
    let class_probs = cfg.source.classes.map(|c| c.emission_probability);
    let sent = multinomial(rng, cycles, class_probs);
    let mut tally = TallySet {
        cycles,
        ..TallySet::default()
    };
    let mut bits = SiftedSignalBits::default();
    for label in IntensityLabel::ALL {
        let mean = cfg.source.class(label).mean_photon_number;
        let probs: OutcomeProbabilities = outcome_probabilities(mean, channel, &cfg.detector);
        let [correct, error, unsifted, _none] =
            multinomial(rng, sent[label.index()], probs.as_array());
        *tally.class_mut(label) = ClassTally {
            sent: sent[label.index()],
            clicked: correct + error + unsifted,
            sifted: correct + error,
            sifted_errors: error,
        };
        if keep_bits && label == IntensityLabel::Signal {
            let len = (correct + error) as usize;
            let alice: BitVec<u64, Lsb0> = (0..len).map(|_| rng.bit()).collect();
            let mut bob = alice.clone();
            for i in index::sample(rng, len, error as usize) {
                let flipped = !bob[i];
                bob.set(i, flipped);
            }
            bits.alice = alice;
            bits.bob = bob;
        }
    }
    (tally, bits)
}

fn per_pulse_block(
    cfg: &SessionConfig,
    source: &PulseSource,
    channel: &Channel,
    start: u64,
    cycles: u64,
    rng: &mut RandomStream,
    keep_bits: bool,
) -> (TallySet, SiftedSignalBits) {
    let mut tally = TallySet {
        cycles,
        ..TallySet::default()
    };
    let mut bits = SiftedSignalBits::default();
    for i in start..start + cycles {
        let pulse = source.emit(rng, i);
        let event = detect(rng, &pulse, channel, &cfg.detector);
        let class = tally.class_mut(pulse.class);
        class.sent += 1;
        if !event.any() {
            continue;
        }
        class.clicked += 1;
        if let Resolution::Measured { basis, bit } =
            event.resolve(cfg.detector.double_click_policy, rng)
        {
            if basis == pulse.basis {
                class.sifted += 1;
                if bit != pulse.bit {
                    class.sifted_errors += 1;
                }
                if keep_bits && pulse.class == IntensityLabel::Signal {
                    bits.alice.push(pulse.bit);
                    bits.bob.push(bit);
                }
            }
        }
    }
    (tally, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonics::DoubleClickPolicy;

    fn lossless(sampling: SamplingMode) -> SessionConfig {
        SessionConfig {
            source: SourceConfig {
                clock_rate_hz: 1e4,
                ..SourceConfig::default()
            },
            detector: DetectorConfig {
                efficiency: 1.0,
                dark_rate_hz: 0.0,
                ..DetectorConfig::default()
            },
            channel: Channel {
                transmittance: 1.0,
                background_click_prob: 0.0,
                misalignment_error: 0.0,
            },
            efficiency_convention: EfficiencyConvention::Detector,
            duration_s: 1.0,
            sampling,
            loss_fluctuation_sigma_db: 0.0,
            block_cycles: DEFAULT_BLOCK_CYCLES,
        }
    }

    #[test]
    fn zero_duration_is_empty() {
        let cfg = SessionConfig {
            duration_s: 0.0,
            ..lossless(SamplingMode::PerPulse)
        };
        assert_eq!(run_session(&cfg, 1).unwrap(), TallySet::default());
    }

    #[test]
    fn lossless_noise_free_sifts_half_without_errors() {
        for sampling in [SamplingMode::PerPulse, SamplingMode::Aggregate] {
            let t = run_session(&lossless(sampling), 42).unwrap();
            assert_eq!(t.cycles, 10_000);
            assert!(t.is_consistent());
            for c in [t.signal, t.decoy] {
                assert_eq!(c.sifted_errors, 0);
                let frac = c.sifted as f64 / c.clicked as f64;
                let sigma = (0.25 / c.clicked as f64).sqrt();
                assert!((frac - 0.5).abs() < 3.0 * sigma, "{sampling:?} {frac}");
            }
            assert_eq!(t.vacuum.clicked, 0);
        }
    }

    #[test]
    fn discard_policy_also_error_free() {
        let mut cfg = lossless(SamplingMode::PerPulse);
        cfg.detector.double_click_policy = DoubleClickPolicy::Discard;
        let t = run_session(&cfg, 5).unwrap();
        assert_eq!(t.signal.sifted_errors, 0);
        assert!(t.signal.sifted < t.signal.clicked);
    }

    #[test]
    fn double_counted_efficiency_rejected() {
        let mut cfg = lossless(SamplingMode::Aggregate);
        cfg.efficiency_convention = EfficiencyConvention::Link;
        cfg.detector.efficiency = 0.08;
        match run_session(&cfg, 1) {
            Err(Error::Validation(issues)) => {
                assert!(issues.iter().any(|i| i.field == "detector.efficiency"))
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn session_is_deterministic_and_block_parallel() {
        let mut cfg = lossless(SamplingMode::PerPulse);
        cfg.channel.transmittance = 0.01;
        cfg.channel.background_click_prob = 1e-4;
        cfg.duration_s = 20.0;
        cfg.block_cycles = 7_000;
        let a = run_session_with_key(&cfg, 99).unwrap();
        let b = run_session_with_key(&cfg, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tally.cycles, 200_000);
        assert_eq!(a.signal_bits.alice.len() as u64, a.tally.signal.sifted);
        let errors = (a.signal_bits.alice.clone() ^ a.signal_bits.bob.clone()).count_ones() as u64;
        assert_eq!(errors, a.tally.signal.sifted_errors);
        assert_ne!(run_session(&cfg, 100).unwrap(), a.tally);
    }

    #[test]
    fn aggregate_key_bits_match_tally() {
        let mut cfg = lossless(SamplingMode::Aggregate);
        cfg.channel.transmittance = 1e-3;
        cfg.channel.misalignment_error = 0.05;
        cfg.duration_s = 1e4;
        cfg.block_cycles = 1_000_000;
        let out = run_session_with_key(&cfg, 3).unwrap();
        assert_eq!(out.signal_bits.bob.len() as u64, out.tally.signal.sifted);
        let errors =
            (out.signal_bits.alice.clone() ^ out.signal_bits.bob.clone()).count_ones() as u64;
        assert_eq!(errors, out.tally.signal.sifted_errors);
    }

    #[test]
    fn loss_fluctuation_lowers_nothing_when_off_and_changes_counts_when_on() {
        let mut cfg = lossless(SamplingMode::Aggregate);
        cfg.channel.transmittance = 1e-3;
        cfg.duration_s = 1e4;
        cfg.block_cycles = 1_000_000;
        let steady = run_session(&cfg, 8).unwrap();
        cfg.loss_fluctuation_sigma_db = 2.0;
        let jittered = run_session(&cfg, 8).unwrap();
        assert_eq!(steady.cycles, jittered.cycles);
        assert_ne!(steady.signal.sifted, jittered.signal.sifted);
    }

    #[test]
    fn multinomial_conserves_total() {
        let mut rng = RandomStream::new(4);
        for n in [0u64, 1, 17, 1_000_000] {
            let d = multinomial(&mut rng, n, [0.5, 0.25, 0.25]);
            assert_eq!(d.iter().sum::<u64>(), n);
            let d = multinomial(&mut rng, n, [0.0, 1.0, 0.0, 0.0]);
            assert_eq!(d, [0, n, 0, 0]);
        }
    }
}
