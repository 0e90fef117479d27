//! Scenario files: a TOML document with one table per subsystem and the unit
//! spelled out in every field name.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constellation::DEFAULT_LEO_INCLINATION_DEG;
use crate::error::{Error, Result, ValidationIssue};
use crate::linkbudget::{self, BackgroundEnvironment, LinkParams, LossItems};
use crate::photonics::{Channel, DetectorConfig, DoubleClickPolicy, SourceConfig};
use crate::postproc::{ReconcileConfig, DEFAULT_BLOCK_LEN, MAX_ITERATIONS};
use crate::primitives::{db_to_transmittance, IntensityClass};
use crate::protocol::{
    EfficiencyConvention, GainNormalization, RateParameters, SamplingMode, SessionConfig,
    BASIS_FACTOR, DEFAULT_BLOCK_CYCLES, DEFAULT_EC_INEFFICIENCY,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub clock_rate_hz: f64,
    pub wavelength_nm: f64,
    pub signal_mean_photons: f64,
    pub decoy_mean_photons: f64,
    pub signal_probability: f64,
    pub decoy_probability: f64,
    pub vacuum_probability: f64,
    #[serde(default = "half")]
    pub basis_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub efficiency: f64,
    pub dark_rate_hz: f64,
    pub gate_window_s: f64,
    #[serde(default = "four")]
    pub detector_count: usize,
    #[serde(default)]
    pub misalignment_error: f64,
    #[serde(default = "random_bit")]
    pub double_click_policy: DoubleClickPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub distance_m: f64,
    pub tx_aperture_m: f64,
    pub rx_aperture_m: f64,
    pub divergence_urad: f64,
    #[serde(default)]
    pub atmospheric_loss_db: f64,
    pub coupling_loss_db: f64,
    #[serde(default)]
    pub detection_loss_db: f64,
    #[serde(default)]
    pub extra_loss_db: f64,
    #[serde(default)]
    pub efficiency_convention: EfficiencyConvention,
    /// Replaces the budget transmittance in the session (detector efficiency
    /// still applied per the convention).
    #[serde(default)]
    pub transmittance_override: Option<f64>,
    #[serde(default)]
    pub loss_fluctuation_sigma_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSection {
    #[serde(default)]
    pub sky_radiance_w_m2_sr_nm: f64,
    /// Replaces the radiometric estimate when present.
    #[serde(default)]
    pub rate_per_detector_hz: Option<f64>,
    pub fov_urad: f64,
    pub filter_bandwidth_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub duration_s: f64,
    #[serde(default = "default_f")]
    pub error_correction_f: f64,
    #[serde(default = "default_q")]
    pub basis_factor_q: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: SamplingMode,
    #[serde(default)]
    pub gain_normalization: GainNormalization,
    #[serde(default = "default_block_cycles")]
    pub block_cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostprocSection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_block_len")]
    pub block_len: usize,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
}

impl Default for PostprocSection {
    fn default() -> Self {
        Self {
            enabled: false,
            block_len: DEFAULT_BLOCK_LEN,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSection {
    #[serde(default = "default_alt_min")]
    pub altitude_min_km: f64,
    #[serde(default = "default_alt_max")]
    pub altitude_max_km: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_inclination")]
    pub inclination_deg: f64,
}

impl Default for ConstellationSection {
    fn default() -> Self {
        Self {
            altitude_min_km: default_alt_min(),
            altitude_max_km: default_alt_max(),
            points: default_points(),
            inclination_deg: default_inclination(),
        }
    }
}

fn half() -> f64 {
    0.5
}
fn four() -> usize {
    4
}
fn random_bit() -> DoubleClickPolicy {
    DoubleClickPolicy::RandomBit
}
fn default_f() -> f64 {
    DEFAULT_EC_INEFFICIENCY
}
fn default_q() -> f64 {
    BASIS_FACTOR
}
fn default_block_cycles() -> u64 {
    DEFAULT_BLOCK_CYCLES
}
fn default_block_len() -> usize {
    DEFAULT_BLOCK_LEN
}
fn default_iterations() -> usize {
    MAX_ITERATIONS
}
fn default_alt_min() -> f64 {
    200.0
}
fn default_alt_max() -> f64 {
    40_000.0
}
fn default_points() -> usize {
    60
}
fn default_inclination() -> f64 {
    DEFAULT_LEO_INCLINATION_DEG
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub source: SourceSection,
    pub detector: DetectorSection,
    pub link: LinkSection,
    pub background: BackgroundSection,
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub postproc: PostprocSection,
    #[serde(default)]
    pub constellation: ConstellationSection,
}

/// Itemized budget as reported, including the detector efficiency line when
/// the detector model carries it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetLedger {
    pub items: LossItems<f64>,
    pub link_total_db: f64,
    pub detector_efficiency_db: f64,
    pub end_to_end_db: f64,
    pub end_to_end_transmittance: f64,
    pub background_rate_per_detector_hz: f64,
    pub total_noise_rate_hz: f64,
    pub background_yield: f64,
    pub background_outside_linear_regime: bool,
    pub transmittance_override: Option<f64>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses and validates; validation failures list every violated rule.
    pub fn from_toml(text: &str) -> Result<Self> {
        let s = Self::parse(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        let s = Self::from_toml(&text)?;
        Ok((s, digest(&text)))
    }

    pub fn source_config(&self) -> SourceConfig {
        let s = &self.source;
        SourceConfig {
            clock_rate_hz: s.clock_rate_hz,
            classes: [
                IntensityClass::signal(s.signal_mean_photons, s.signal_probability),
                IntensityClass::decoy(s.decoy_mean_photons, s.decoy_probability),
                IntensityClass::vacuum(s.vacuum_probability),
            ],
            basis_probability: s.basis_probability,
            wavelength_nm: s.wavelength_nm,
        }
    }

    pub fn detector_config(&self) -> DetectorConfig {
        let d = &self.detector;
        DetectorConfig {
            efficiency: d.efficiency,
            dark_rate_hz: d.dark_rate_hz,
            gate_window_s: d.gate_window_s,
            detector_count: d.detector_count,
            double_click_policy: d.double_click_policy,
        }
    }

    pub fn link_params(&self) -> LinkParams<f64> {
        let l = &self.link;
        LinkParams {
            distance_m: l.distance_m,
            tx_aperture_m: l.tx_aperture_m,
            rx_aperture_m: l.rx_aperture_m,
            divergence_rad: l.divergence_urad * 1e-6,
            atmospheric_loss_db: l.atmospheric_loss_db,
            coupling_loss_db: l.coupling_loss_db,
            detection_loss_db: l.detection_loss_db,
            extra_loss_db: l.extra_loss_db,
        }
    }

    pub fn background_environment(&self) -> BackgroundEnvironment<f64> {
        BackgroundEnvironment {
            wavelength_m: self.source.wavelength_nm * 1e-9,
            sky_spectral_radiance: self.background.sky_radiance_w_m2_sr_nm,
            fov_full_angle_rad: self.background.fov_urad * 1e-6,
            filter_bandwidth_nm: self.background.filter_bandwidth_nm,
            gate_window_s: self.detector.gate_window_s,
        }
    }

    /// Efficiency seen by background photons: the detector model's value, or
    /// the detection loss line under the link convention.
    fn background_efficiency(&self) -> f64 {
        match self.link.efficiency_convention {
            EfficiencyConvention::Detector => self.detector.efficiency,
            EfficiencyConvention::Link => 10f64.powf(-self.link.detection_loss_db / 10.0),
        }
    }

    pub fn background_rate_per_detector_hz(&self) -> Result<f64> {
        if let Some(rate) = self.background.rate_per_detector_hz {
            return Ok(rate);
        }
        let total = linkbudget::background_count_rate(
            &self.background_environment(),
            self.link.rx_aperture_m,
            self.background_efficiency(),
        )?;
        Ok(total / self.detector.detector_count as f64)
    }

    pub fn budget(&self) -> Result<BudgetLedger> {
        let link = linkbudget::total_link_loss(&self.link_params())?;
        let detector_efficiency_db = match self.link.efficiency_convention {
            EfficiencyConvention::Detector => -10.0 * self.detector.efficiency.log10(),
            EfficiencyConvention::Link => 0.0,
        };
        let end_to_end_db = link.total_db + detector_efficiency_db;
        let per_detector = self.background_rate_per_detector_hz()?;
        let count = self.detector.detector_count as f64;
        let total_noise = count * (per_detector + self.detector.dark_rate_hz);
        let y = linkbudget::background_yield(total_noise, self.detector.gate_window_s)?;
        Ok(BudgetLedger {
            items: link.items,
            link_total_db: link.total_db,
            detector_efficiency_db,
            end_to_end_db,
            end_to_end_transmittance: db_to_transmittance(end_to_end_db)?,
            background_rate_per_detector_hz: per_detector,
            total_noise_rate_hz: total_noise,
            background_yield: y.probability,
            background_outside_linear_regime: y.outside_linear_regime,
            transmittance_override: self.link.transmittance_override,
        })
    }

    pub fn session_config(&self) -> Result<SessionConfig> {
        let link_t = match self.link.transmittance_override {
            Some(t) => t,
            None => linkbudget::total_link_loss(&self.link_params())?.end_to_end_transmittance,
        };
        let bg = self.background_rate_per_detector_hz()?;
        Ok(SessionConfig {
            source: self.source_config(),
            detector: self.detector_config(),
            channel: Channel {
                transmittance: link_t,
                background_click_prob: -(-bg * self.detector.gate_window_s).exp_m1(),
                misalignment_error: self.detector.misalignment_error,
            },
            efficiency_convention: self.link.efficiency_convention,
            duration_s: self.protocol.duration_s,
            sampling: self.protocol.sampling,
            loss_fluctuation_sigma_db: self.link.loss_fluctuation_sigma_db,
            block_cycles: self.protocol.block_cycles,
        })
    }

    pub fn rate_parameters(&self) -> RateParameters {
        RateParameters {
            clock_rate_hz: self.source.clock_rate_hz,
            duration_s: self.protocol.duration_s,
            mu: self.source.signal_mean_photons,
            nu: self.source.decoy_mean_photons,
            p_mu: self.source.signal_probability,
            f: self.protocol.error_correction_f,
            q: self.protocol.basis_factor_q,
        }
    }

    pub fn reconcile_config(&self, seed: u64) -> ReconcileConfig {
        ReconcileConfig {
            block_len: self.postproc.block_len,
            max_iterations: self.postproc.max_iterations,
            code_seed: seed ^ 0xc0de,
            verify_seed: seed ^ 0x7a9,
            ..ReconcileConfig::default()
        }
    }

    pub fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = self.source_config().issues();
        out.extend(self.detector_config().issues());
        let d = &self.detector;
        if !(0.0..=0.5).contains(&d.misalignment_error) {
            out.push(ValidationIssue::new(
                "detector.misalignment_error",
                "must lie in [0, 0.5]",
            ));
        }
        if !(self.source.wavelength_nm > 0.0) {
            out.push(ValidationIssue::new("source.wavelength_nm", "must be > 0"));
        }

        let l = &self.link;
        for (field, v) in [
            ("link.distance_m", l.distance_m),
            ("link.tx_aperture_m", l.tx_aperture_m),
            ("link.rx_aperture_m", l.rx_aperture_m),
        ] {
            if !(v > 0.0) {
                out.push(ValidationIssue::new(field, "must be > 0"));
            }
        }
        for (field, v) in [
            ("link.divergence_urad", l.divergence_urad),
            ("link.atmospheric_loss_db", l.atmospheric_loss_db),
            ("link.coupling_loss_db", l.coupling_loss_db),
            ("link.detection_loss_db", l.detection_loss_db),
            ("link.extra_loss_db", l.extra_loss_db),
            (
                "link.loss_fluctuation_sigma_db",
                l.loss_fluctuation_sigma_db,
            ),
        ] {
            if !(v >= 0.0) {
                out.push(ValidationIssue::new(field, "must be >= 0"));
            }
        }
        if let Some(t) = l.transmittance_override {
            if !(t > 0.0 && t <= 1.0) {
                out.push(ValidationIssue::new(
                    "link.transmittance_override",
                    "must lie in (0, 1]",
                ));
            }
        }
        match l.efficiency_convention {
            EfficiencyConvention::Detector if l.detection_loss_db != 0.0 => out.push(ValidationIssue::new(
                "link.detection_loss_db",
                "detector efficiency is applied by the detector model; detection loss would count it twice",
            )),
            EfficiencyConvention::Link if d.efficiency != 1.0 => out.push(ValidationIssue::new(
                "detector.efficiency",
                "detector efficiency is folded into link.detection_loss_db; set it to 1",
            )),
            _ => {}
        }

        let b = &self.background;
        if !(b.sky_radiance_w_m2_sr_nm >= 0.0) {
            out.push(ValidationIssue::new(
                "background.sky_radiance_w_m2_sr_nm",
                "must be >= 0",
            ));
        }
        if let Some(r) = b.rate_per_detector_hz {
            if !(r >= 0.0) {
                out.push(ValidationIssue::new(
                    "background.rate_per_detector_hz",
                    "must be >= 0",
                ));
            }
        }
        if !(b.fov_urad > 0.0 && b.fov_urad < 1e4) {
            out.push(ValidationIssue::new(
                "background.fov_urad",
                "must lie in (0, 1e4) (small-angle model)",
            ));
        }
        if !(b.filter_bandwidth_nm > 0.0) {
            out.push(ValidationIssue::new(
                "background.filter_bandwidth_nm",
                "must be > 0",
            ));
        }

        let p = &self.protocol;
        if !(p.duration_s >= 0.0 && p.duration_s.is_finite()) {
            out.push(ValidationIssue::new("protocol.duration_s", "must be >= 0"));
        }
        if !(p.error_correction_f >= 1.0) {
            out.push(ValidationIssue::new(
                "protocol.error_correction_f",
                "must be >= 1",
            ));
        }
        if !(p.basis_factor_q > 0.0 && p.basis_factor_q <= 1.0) {
            out.push(ValidationIssue::new(
                "protocol.basis_factor_q",
                "must lie in (0, 1]",
            ));
        }
        if p.block_cycles == 0 {
            out.push(ValidationIssue::new("protocol.block_cycles", "must be > 0"));
        }

        if self.postproc.block_len < 64 {
            out.push(ValidationIssue::new("postproc.block_len", "must be >= 64"));
        }
        if self.postproc.max_iterations == 0 {
            out.push(ValidationIssue::new(
                "postproc.max_iterations",
                "must be > 0",
            ));
        }

        let c = &self.constellation;
        if !(c.altitude_min_km > 0.0 && c.altitude_max_km >= c.altitude_min_km) {
            out.push(ValidationIssue::new(
                "constellation.altitude_min_km",
                "need 0 < altitude_min_km <= altitude_max_km",
            ));
        }
        if c.points == 0 {
            out.push(ValidationIssue::new("constellation.points", "must be > 0"));
        }
        if !(0.0..=180.0).contains(&c.inclination_deg) {
            out.push(ValidationIssue::new(
                "constellation.inclination_deg",
                "must lie in [0, 180]",
            ));
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
}

/// Hex SHA-256 of the scenario text.
pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub const DAYLIGHT_SCENARIO: &str = include_str!("../fixtures/daylight_53km.scenario");

#[cfg(test)]
mod tests {
    use super::*;

    fn daylight() -> Scenario {
        Scenario::from_toml(DAYLIGHT_SCENARIO).unwrap()
    }

    fn fields(text: &str) -> Vec<String> {
        match Scenario::from_toml(text) {
            Err(Error::Validation(issues)) => issues.into_iter().map(|i| i.field).collect(),
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn bundled_fixture_is_valid() {
        let s = daylight();
        assert_eq!(s.source.clock_rate_hz, 1e8);
        assert_eq!(s.protocol.duration_s, 464.0);
        let cfg = s.session_config().unwrap();
        assert_eq!(cfg.cycles(), 46_400_000_000);
    }

    #[test]
    fn fixture_budget_assembles_to_48_db() {
        let b = daylight().budget().unwrap();
        assert!((b.items.geometric_db - 6.5228).abs() < 1e-3);
        assert!((b.end_to_end_db - 48.0).abs() < 1e-3, "{}", b.end_to_end_db);
        assert!((b.link_total_db + b.detector_efficiency_db - b.end_to_end_db).abs() < 1e-12);
        assert!(
            (b.total_noise_rate_hz - 238.0).abs() < 0.1,
            "{}",
            b.total_noise_rate_hz
        );
        assert!((b.background_yield - 2.38e-7).abs() < 1e-10);
    }

    #[test]
    fn probability_sum_names_the_field() {
        let bad =
            DAYLIGHT_SCENARIO.replace("vacuum_probability = 0.25", "vacuum_probability = 0.15");
        assert!(fields(&bad).contains(&"source.signal_probability".to_string()));
    }

    #[test]
    fn every_violation_is_listed() {
        let bad = DAYLIGHT_SCENARIO
            .replace("decoy_mean_photons = 0.14", "decoy_mean_photons = 0.7")
            .replace("coupling_loss_db = 14.0", "coupling_loss_db = -1.0")
            .replace("detection_loss_db = 0.0", "detection_loss_db = 11.0");
        let f = fields(&bad);
        assert!(f.contains(&"source.decoy_mean_photons".to_string()));
        assert!(f.contains(&"link.coupling_loss_db".to_string()));
        assert!(f.contains(&"link.detection_loss_db".to_string()));
    }

    #[test]
    fn link_convention_requires_unit_detector_efficiency() {
        let bad = DAYLIGHT_SCENARIO.replace(
            "efficiency_convention = \"detector\"",
            "efficiency_convention = \"link\"",
        );
        assert!(fields(&bad).contains(&"detector.efficiency".to_string()));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let bad = DAYLIGHT_SCENARIO.replace("[link]", "[link]\nbogus_db = 1.0");
        assert!(matches!(Scenario::from_toml(&bad), Err(Error::Parse(_))));
    }

    #[test]
    fn digest_is_stable_hex() {
        let d = digest("abc");
        assert_eq!(
            d,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
