use serde::{Deserialize, Serialize};

use crate::error::ValidationIssue;
use crate::primitives::{Basis, Polarization, PulseRecord, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubleClickPolicy {
    /// Multi-click events are squashed: a random basis when both bases fire,
    /// then a random bit when both detectors of that basis fire.
    RandomBit,
    /// Any multi-click event is dropped.
    Discard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub efficiency: f64,
    /// Per detector.
    pub dark_rate_hz: f64,
    pub gate_window_s: f64,
    pub detector_count: usize,
    pub double_click_policy: DoubleClickPolicy,
}

impl Default for DetectorConfig {
    /// Up-conversion detectors: 8 % system efficiency, 20 Hz dark, 1 ns gate.
    fn default() -> Self {
        Self {
            efficiency: 0.08,
            dark_rate_hz: 20.0,
            gate_window_s: 1e-9,
            detector_count: 4,
            double_click_policy: DoubleClickPolicy::RandomBit,
        }
    }
}

impl DetectorConfig {
    pub fn dark_click_probability(&self) -> f64 {
        self.dark_rate_hz * self.gate_window_s
    }

    pub fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = Vec::new();
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            out.push(ValidationIssue::new(
                "detector.efficiency",
                "must lie in (0, 1]",
            ));
        }
        if !(self.dark_rate_hz >= 0.0) {
            out.push(ValidationIssue::new(
                "detector.dark_rate_hz",
                "must be >= 0",
            ));
        }
        if !(self.gate_window_s > 0.0) {
            out.push(ValidationIssue::new(
                "detector.gate_window_s",
                "must be > 0",
            ));
        }
        if self.detector_count != 4 {
            out.push(ValidationIssue::new(
                "detector.detector_count",
                "a passive BB84 receiver has exactly 4 detectors",
            ));
        }
        out
    }
}

/// Channel seen by one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// Per-photon probability of reaching a detector and being registered.
    pub transmittance: f64,
    /// Sky-background click probability per detector per gate, excluding dark counts.
    pub background_click_prob: f64,
    /// Probability that a photon measured in the preparation basis lands on the
    /// wrong detector.
    pub misalignment_error: f64,
}

impl Channel {
    pub fn noise_click_probability(&self, cfg: &DetectorConfig) -> f64 {
        (self.background_click_prob + cfg.dark_click_probability()).clamp(0.0, 1.0)
    }
}

/// Which of the four detectors (H, V, +, −) fired during one gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DetectionEvent {
    pub clicks: [bool; 4],
}

/// Bob's measurement record after multi-click resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    NoClick,
    /// Clicked, but discarded by the double-click policy.
    Discarded,
    Measured {
        basis: Basis,
        bit: bool,
    },
}

impl DetectionEvent {
    pub fn any(&self) -> bool {
        self.clicks.iter().any(|&c| c)
    }

    fn pair(&self, basis: Basis) -> (bool, bool) {
        match basis {
            Basis::Rectilinear => (self.clicks[0], self.clicks[1]),
            Basis::Diagonal => (self.clicks[2], self.clicks[3]),
        }
    }

    pub fn resolve(&self, policy: DoubleClickPolicy, rng: &mut RandomStream) -> Resolution {
        let rect = self.pair(Basis::Rectilinear);
        let diag = self.pair(Basis::Diagonal);
        let any_rect = rect.0 || rect.1;
        let any_diag = diag.0 || diag.1;
        let basis = match (any_rect, any_diag) {
            (false, false) => return Resolution::NoClick,
            (true, false) => Basis::Rectilinear,
            (false, true) => Basis::Diagonal,
            (true, true) => match policy {
                DoubleClickPolicy::Discard => return Resolution::Discarded,
                DoubleClickPolicy::RandomBit => {
                    if rng.bit() {
                        Basis::Diagonal
                    } else {
                        Basis::Rectilinear
                    }
                }
            },
        };
        let bit = match self.pair(basis) {
            (true, false) => false,
            (false, true) => true,
            _ => match policy {
                DoubleClickPolicy::Discard => return Resolution::Discarded,
                DoubleClickPolicy::RandomBit => rng.bit(),
            },
        };
        Resolution::Measured { basis, bit }
    }
}

/// Photon-level detection of one pulse.
///
/// Each photon survives with `channel.transmittance`, picks a measurement
/// basis at the beam splitter, and is routed by its polarization projection
/// (wrong-basis photons split evenly). Every detector also fires
/// independently from dark counts and background.
pub fn detect(
    rng: &mut RandomStream,
    pulse: &PulseRecord,
    channel: &Channel,
    cfg: &DetectorConfig,
) -> DetectionEvent {
    let mut event = DetectionEvent::default();
    let sent = pulse.polarization();
    for _ in 0..pulse.photon_count {
        if !rng.bernoulli(channel.transmittance) {
            continue;
        }
        let measured = if rng.bit() {
            Basis::Diagonal
        } else {
            Basis::Rectilinear
        };
        let bit = if measured == sent.basis() {
            sent.bit() ^ rng.bernoulli(channel.misalignment_error)
        } else {
            rng.bit()
        };
        event.clicks[Polarization::new(measured, bit).detector_index()] = true;
    }
    let noise = channel.noise_click_probability(cfg);
    for click in event.clicks.iter_mut() {
        if rng.bernoulli(noise) {
            *click = true;
        }
    }
    event
}

/// Exact per-pulse outcome distribution for a class with Poisson mean
/// `mean_photons`, matching [`detect`] followed by [`DetectionEvent::resolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbabilities {
    pub sifted_correct: f64,
    pub sifted_error: f64,
    /// Clicked but not sifted (other basis, or discarded).
    pub unsifted_click: f64,
    pub no_click: f64,
}

impl OutcomeProbabilities {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.sifted_correct,
            self.sifted_error,
            self.unsifted_click,
            self.no_click,
        ]
    }
}

pub fn outcome_probabilities(
    mean_photons: f64,
    channel: &Channel,
    cfg: &DetectorConfig,
) -> OutcomeProbabilities {
    // Poisson thinning: each detector sees an independent Poisson photon number.
    let arriving = mean_photons * channel.transmittance;
    let e = channel.misalignment_error;
    let lambda_correct = arriving * (1.0 - e) / 2.0;
    let lambda_wrong = arriving * e / 2.0;
    let lambda_other = arriving / 4.0;
    let quiet = 1.0 - channel.noise_click_probability(cfg);
    let click = |lambda: f64| 1.0 - (-lambda).exp() * quiet;

    let pc = click(lambda_correct);
    let pw = click(lambda_wrong);
    let po = click(lambda_other);
    let other_silent = (1.0 - po) * (1.0 - po);
    let other_any = 1.0 - other_silent;
    let only_correct = pc * (1.0 - pw);
    let only_wrong = (1.0 - pc) * pw;
    let both = pc * pw;
    let any_click = 1.0 - (1.0 - pc) * (1.0 - pw) * other_silent;

    let (correct, error) = match cfg.double_click_policy {
        DoubleClickPolicy::RandomBit => {
            let weight = other_silent + 0.5 * other_any;
            (
                weight * (only_correct + 0.5 * both),
                weight * (only_wrong + 0.5 * both),
            )
        }
        DoubleClickPolicy::Discard => (other_silent * only_correct, other_silent * only_wrong),
    };
    OutcomeProbabilities {
        sifted_correct: correct,
        sifted_error: error,
        unsifted_click: (any_click - correct - error).max(0.0),
        no_click: 1.0 - any_click,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::IntensityLabel;

    fn pulse(photons: u32, basis: Basis, bit: bool) -> PulseRecord {
        PulseRecord {
            index: 0,
            bit,
            basis,
            class: IntensityLabel::Signal,
            photon_count: photons,
        }
    }

    fn quiet_cfg() -> DetectorConfig {
        DetectorConfig {
            efficiency: 1.0,
            dark_rate_hz: 0.0,
            ..DetectorConfig::default()
        }
    }

    #[test]
    fn dark_channel_never_clicks() {
        let ch = Channel {
            transmittance: 0.0,
            background_click_prob: 0.0,
            misalignment_error: 0.0,
        };
        let mut rng = RandomStream::new(1);
        for _ in 0..10_000 {
            assert!(!detect(
                &mut rng,
                &pulse(5, Basis::Diagonal, true),
                &ch,
                &quiet_cfg()
            )
            .any());
        }
    }

    #[test]
    fn lossless_single_photon_never_errs() {
        let ch = Channel {
            transmittance: 1.0,
            background_click_prob: 0.0,
            misalignment_error: 0.0,
        };
        let mut rng = RandomStream::new(2);
        let mut matched = 0;
        for i in 0..10_000 {
            let bit = i % 3 == 0;
            let basis = if i % 2 == 0 {
                Basis::Rectilinear
            } else {
                Basis::Diagonal
            };
            let p = pulse(1, basis, bit);
            let ev = detect(&mut rng, &p, &ch, &quiet_cfg());
            assert_eq!(ev.clicks.iter().filter(|&&c| c).count(), 1);
            if let Resolution::Measured { basis: b, bit: got } =
                ev.resolve(DoubleClickPolicy::RandomBit, &mut rng)
            {
                if b == basis {
                    matched += 1;
                    assert_eq!(got, bit);
                    assert!(ev.clicks[p.polarization().detector_index()]);
                }
            } else {
                panic!("lossless photon must register");
            }
        }
        assert!((matched as f64 - 5000.0).abs() < 3.0 * 50.0);
    }

    #[test]
    fn resolve_policies() {
        let mut rng = RandomStream::new(3);
        let cross = DetectionEvent {
            clicks: [true, false, false, true],
        };
        assert_eq!(
            cross.resolve(DoubleClickPolicy::Discard, &mut rng),
            Resolution::Discarded
        );
        assert!(matches!(
            cross.resolve(DoubleClickPolicy::RandomBit, &mut rng),
            Resolution::Measured { .. }
        ));
        let double = DetectionEvent {
            clicks: [true, true, false, false],
        };
        assert_eq!(
            double.resolve(DoubleClickPolicy::Discard, &mut rng),
            Resolution::Discarded
        );
        let none = DetectionEvent::default();
        assert_eq!(
            none.resolve(DoubleClickPolicy::RandomBit, &mut rng),
            Resolution::NoClick
        );
        let single = DetectionEvent {
            clicks: [false, false, false, true],
        };
        assert_eq!(
            single.resolve(DoubleClickPolicy::Discard, &mut rng),
            Resolution::Measured {
                basis: Basis::Diagonal,
                bit: true
            }
        );
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        for policy in [DoubleClickPolicy::RandomBit, DoubleClickPolicy::Discard] {
            let cfg = DetectorConfig {
                double_click_policy: policy,
                ..DetectorConfig::default()
            };
            for mean in [0.0, 0.14, 0.6, 3.0] {
                let ch = Channel {
                    transmittance: 0.3,
                    background_click_prob: 1e-3,
                    misalignment_error: 0.02,
                };
                let o = outcome_probabilities(mean, &ch, &cfg);
                let s: f64 = o.as_array().iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!(o.as_array().iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn vacuum_noise_is_half_wrong() {
        let ch = Channel {
            transmittance: 0.5,
            background_click_prob: 1e-4,
            misalignment_error: 0.0,
        };
        let o = outcome_probabilities(0.0, &ch, &DetectorConfig::default());
        assert!((o.sifted_correct - o.sifted_error).abs() < 1e-18);
    }
}
