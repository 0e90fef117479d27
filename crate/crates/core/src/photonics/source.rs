use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ValidationIssue};
use crate::primitives::{Basis, IntensityClass, IntensityLabel, PulseRecord, RandomStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub clock_rate_hz: f64,
    /// Indexed by [`IntensityLabel::index`]: signal, decoy, vacuum.
    pub classes: [IntensityClass; 3],
    /// Probability of preparing in the diagonal basis.
    pub basis_probability: f64,
    pub wavelength_nm: f64,
}

impl Default for SourceConfig {
    /// 100 MHz source at 1550.14 nm, μ = 0.6 and ν = 0.14 in a 2:1:1 mix with vacuum.
    fn default() -> Self {
        Self {
            clock_rate_hz: 1e8,
            classes: [
                IntensityClass::signal(0.6, 0.5),
                IntensityClass::decoy(0.14, 0.25),
                IntensityClass::vacuum(0.25),
            ],
            basis_probability: 0.5,
            wavelength_nm: 1550.14,
        }
    }
}

impl SourceConfig {
    pub fn class(&self, label: IntensityLabel) -> &IntensityClass {
        &self.classes[label.index()]
    }

    pub fn signal_mean(&self) -> f64 {
        self.class(IntensityLabel::Signal).mean_photon_number
    }

    pub fn decoy_mean(&self) -> f64 {
        self.class(IntensityLabel::Decoy).mean_photon_number
    }

    pub fn signal_probability(&self) -> f64 {
        self.class(IntensityLabel::Signal).emission_probability
    }

    pub fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = Vec::new();
        if !(self.clock_rate_hz > 0.0) {
            out.push(ValidationIssue::new("source.clock_rate_hz", "must be > 0"));
        }
        for (i, class) in self.classes.iter().enumerate() {
            if class.label.index() != i {
                out.push(ValidationIssue::new(
                    "source.classes",
                    "classes must be ordered signal, decoy, vacuum",
                ));
            }
            let name = class.label.as_str();
            if !(class.mean_photon_number >= 0.0) {
                out.push(ValidationIssue::new(
                    format!("source.{name}_mean_photons"),
                    "must be >= 0",
                ));
            }
            if !(0.0..=1.0).contains(&class.emission_probability) {
                out.push(ValidationIssue::new(
                    format!("source.{name}_probability"),
                    "must lie in [0, 1]",
                ));
            }
        }
        if self.class(IntensityLabel::Vacuum).mean_photon_number != 0.0 {
            out.push(ValidationIssue::new(
                "source.vacuum_mean_photons",
                "vacuum class must have mean 0",
            ));
        }
        let total: f64 = self.classes.iter().map(|c| c.emission_probability).sum();
        if (total - 1.0).abs() > 1e-9 {
            out.push(ValidationIssue::new(
                "source.signal_probability",
                format!("class probabilities sum to {total}, expected 1"),
            ));
        }
        if !(self.signal_mean() > self.decoy_mean()) {
            out.push(ValidationIssue::new(
                "source.decoy_mean_photons",
                format!(
                    "signal mean {} must exceed decoy mean {}",
                    self.signal_mean(),
                    self.decoy_mean()
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.basis_probability) {
            out.push(ValidationIssue::new(
                "source.basis_probability",
                "must lie in [0, 1]",
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(crate::error::Error::Validation(issues))
        }
    }
}

/// Sampler with the per-class photon-number distributions prebuilt.
#[derive(Debug, Clone)]
pub struct PulseSource {
    cfg: SourceConfig,
    poisson: [Option<Poisson<f64>>; 3],
}

impl PulseSource {
    pub fn new(cfg: SourceConfig) -> Result<Self> {
        cfg.validate()?;
        let poisson = cfg.classes.map(|c| {
            (c.mean_photon_number > 0.0)
                .then(|| Poisson::new(c.mean_photon_number).expect("positive mean"))
        });
        Ok(Self { cfg, poisson })
    }

    pub fn config(&self) -> &SourceConfig {
        &self.cfg
    }

    pub fn emit(&self, rng: &mut RandomStream, index: u64) -> PulseRecord {
        let u = rng.uniform();
        let p_signal = self.cfg.classes[0].emission_probability;
        let p_decoy = self.cfg.classes[1].emission_probability;
        let class = if u < p_signal {
            IntensityLabel::Signal
        } else if u < p_signal + p_decoy {
            IntensityLabel::Decoy
        } else {
            IntensityLabel::Vacuum
        };
        let bit = rng.bit();
        let basis = if rng.bernoulli(self.cfg.basis_probability) {
            Basis::Diagonal
        } else {
            Basis::Rectilinear
        };
        let photon_count = match &self.poisson[class.index()] {
            Some(dist) => dist.sample(rng) as u32,
            None => 0,
        };
        PulseRecord {
            index,
            bit,
            basis,
            class,
            photon_count,
        }
    }
}

/// One-off emission; builds the sampler on every call, so loops should hold a
/// [`PulseSource`] instead.
pub fn emit_pulse(rng: &mut RandomStream, cfg: &SourceConfig, index: u64) -> Result<PulseRecord> {
    Ok(PulseSource::new(cfg.clone())?.emit(rng, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_source_is_valid() {
        assert!(SourceConfig::default().validate().is_ok());
    }

    #[test]
    fn probability_sum_rejected() {
        let mut cfg = SourceConfig::default();
        cfg.classes[0].emission_probability = 0.4;
        let issues = cfg.issues();
        assert!(issues
            .iter()
            .any(|i| i.field == "source.signal_probability"));
    }

    #[test]
    fn decoy_must_be_weaker() {
        let mut cfg = SourceConfig::default();
        cfg.classes[1].mean_photon_number = 0.6;
        assert!(cfg
            .issues()
            .iter()
            .any(|i| i.field == "source.decoy_mean_photons"));
    }

    #[test]
    fn vacuum_pulses_are_empty() {
        let src = PulseSource::new(SourceConfig::default()).unwrap();
        let mut rng = RandomStream::new(3);
        for i in 0..100_000 {
            let p = src.emit(&mut rng, i);
            if p.class == IntensityLabel::Vacuum {
                assert_eq!(p.photon_count, 0);
            }
        }
    }

    #[test]
    fn class_frequencies_and_photon_mean() {
        let src = PulseSource::new(SourceConfig::default()).unwrap();
        let mut rng = RandomStream::new(11);
        let n = 1_000_000u64;
        let mut signal = 0u64;
        let mut photons = 0u64;
        let mut diag = 0u64;
        for i in 0..n {
            let p = src.emit(&mut rng, i);
            if p.class == IntensityLabel::Signal {
                signal += 1;
                photons += p.photon_count as u64;
            }
            diag += (p.basis == Basis::Diagonal) as u64;
        }
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((signal as f64 - 0.5 * n as f64).abs() < 3.0 * sigma);
        assert!((diag as f64 - 0.5 * n as f64).abs() < 3.0 * sigma);
        let mean = photons as f64 / signal as f64;
        let se = (0.6 / signal as f64).sqrt();
        assert!((mean - 0.6).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn emission_is_deterministic() {
        let cfg = SourceConfig::default();
        let mut a = RandomStream::new(5);
        let mut b = RandomStream::new(5);
        for i in 0..1000 {
            assert_eq!(
                emit_pulse(&mut a, &cfg, i).unwrap(),
                emit_pulse(&mut b, &cfg, i).unwrap()
            );
        }
    }
}
