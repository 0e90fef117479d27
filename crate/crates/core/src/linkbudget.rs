//! Optical loss budget and daylight background model for a free-space link.
//!
//! The beam is treated as a flat-top disc whose diameter grows linearly with
//! distance; the background is isotropic sky radiance collected within the
//! receiver field of view and a flat filter passband.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::primitives::{db_to_transmittance, transmittance_to_db};
use crate::scalar::Real;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Noise reduction measured on the 53 km horizontal path at 1550 nm relative
/// to 850 nm. Mie scattering dominates horizontally, so no model here predicts
/// it; it is kept for reporting only.
pub const MEASURED_HORIZONTAL_REDUCTION_VS_850NM: f64 = 22.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkParams<T> {
    pub distance_m: T,
    pub tx_aperture_m: T,
    pub rx_aperture_m: T,
    /// Full-angle beam divergence in radians.
    pub divergence_rad: T,
    pub atmospheric_loss_db: T,
    pub coupling_loss_db: T,
    pub detection_loss_db: T,
    pub extra_loss_db: T,
}

impl<T: Real> LinkParams<T> {
    /// The 53 km daylight link: 254 mm sender, 420 mm receiver, 12 µrad beam,
    /// 14 dB single-mode coupling. Residual channel terms are left at zero.
    pub fn qinghai_53km() -> Self {
        Self {
            distance_m: T::lit(53e3),
            tx_aperture_m: T::lit(0.254),
            rx_aperture_m: T::lit(0.420),
            divergence_rad: T::lit(12e-6),
            atmospheric_loss_db: T::zero(),
            coupling_loss_db: T::lit(14.0),
            detection_loss_db: T::zero(),
            extra_loss_db: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("distance_m", self.distance_m),
            ("tx_aperture_m", self.tx_aperture_m),
            ("rx_aperture_m", self.rx_aperture_m),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) {
                return Err(domain(name, as_f64(v), "> 0"));
            }
        }
        let non_negative = [
            ("divergence_rad", self.divergence_rad),
            ("atmospheric_loss_db", self.atmospheric_loss_db),
            ("coupling_loss_db", self.coupling_loss_db),
            ("detection_loss_db", self.detection_loss_db),
            ("extra_loss_db", self.extra_loss_db),
        ];
        for (name, v) in non_negative {
            if !(v >= T::zero()) {
                return Err(domain(name, as_f64(v), ">= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundEnvironment<T> {
    pub wavelength_m: T,
    /// W·m⁻²·sr⁻¹·nm⁻¹
    pub sky_spectral_radiance: T,
    /// Full receiving angle in radians.
    pub fov_full_angle_rad: T,
    pub filter_bandwidth_nm: T,
    pub gate_window_s: T,
}

impl<T: Real> BackgroundEnvironment<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("wavelength_m", self.wavelength_m),
            ("fov_full_angle_rad", self.fov_full_angle_rad),
            ("filter_bandwidth_nm", self.filter_bandwidth_nm),
            ("gate_window_s", self.gate_window_s),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) {
                return Err(domain(name, as_f64(v), "> 0"));
            }
        }
        if !(self.sky_spectral_radiance >= T::zero()) {
            return Err(domain(
                "sky_spectral_radiance",
                as_f64(self.sky_spectral_radiance),
                ">= 0",
            ));
        }
        if !(self.fov_full_angle_rad < T::lit(1e-2)) {
            return Err(domain(
                "fov_full_angle_rad",
                as_f64(self.fov_full_angle_rad),
                "< 1e-2 rad (small-angle model)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossItems<T> {
    pub geometric_db: T,
    pub atmospheric_db: T,
    pub coupling_db: T,
    pub detection_db: T,
    pub extra_db: T,
}

impl<T: Real> LossItems<T> {
    pub fn sum(&self) -> T {
        self.geometric_db
            + self.atmospheric_db
            + self.coupling_db
            + self.detection_db
            + self.extra_db
    }

    pub fn rows(&self) -> [(&'static str, T); 5] {
        [
            ("geometric", self.geometric_db),
            ("atmospheric", self.atmospheric_db),
            ("coupling", self.coupling_db),
            ("detection", self.detection_db),
            ("extra", self.extra_db),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundTerms<T> {
    /// Sky background on each of `detector_count` detectors, Hz.
    pub rate_per_detector_hz: T,
    /// Vacuum click probability per gate summed over all detectors, background plus dark.
    pub yield_per_gate: T,
    pub outside_linear_regime: bool,
}

/// Itemized loss ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget<T> {
    pub items: LossItems<T>,
    pub total_db: T,
    pub end_to_end_transmittance: T,
    pub background: Option<BackgroundTerms<T>>,
}

impl<T: Real> LinkBudget<T> {
    /// Attaches background terms for a receiver with `detector_count`
    /// detectors of the given efficiency and dark rate.
    pub fn with_background(
        mut self,
        env: &BackgroundEnvironment<T>,
        rx_aperture_m: T,
        detector_efficiency: T,
        dark_rate_hz: T,
        detector_count: usize,
    ) -> Result<Self> {
        let total = background_count_rate(env, rx_aperture_m, detector_efficiency)?;
        let count = T::from_usize(detector_count).expect("detector count");
        let noise = total + count * dark_rate_hz;
        let y = background_yield(noise, env.gate_window_s)?;
        self.background = Some(BackgroundTerms {
            rate_per_detector_hz: total / count,
            yield_per_gate: y.probability,
            outside_linear_regime: y.outside_linear_regime,
        });
        Ok(self)
    }
}

fn as_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Loss from the beam spot overfilling the receiver aperture.
pub fn geometric_loss<T: Real>(params: &LinkParams<T>) -> Result<T> {
    params.validate()?;
    let spot = params.tx_aperture_m + params.divergence_rad * params.distance_m;
    let captured = (params.rx_aperture_m / spot).powi(2).min(T::one());
    transmittance_to_db(captured)
}

pub fn total_link_loss<T: Real>(params: &LinkParams<T>) -> Result<LinkBudget<T>> {
    let items = LossItems {
        geometric_db: geometric_loss(params)?,
        atmospheric_db: params.atmospheric_loss_db,
        coupling_db: params.coupling_loss_db,
        detection_db: params.detection_loss_db,
        extra_db: params.extra_loss_db,
    };
    let total_db = items.sum();
    Ok(LinkBudget {
        items,
        total_db,
        end_to_end_transmittance: db_to_transmittance(total_db)?,
        background: None,
    })
}

/// Residual loss that makes a budget with `params` (residual terms ignored)
/// reach `target_total_db`. Fails if geometry and coupling already exceed it.
pub fn residual_for_total<T: Real>(params: &LinkParams<T>, target_total_db: T) -> Result<T> {
    let fixed = geometric_loss(params)? + params.coupling_loss_db + params.detection_loss_db;
    let residual = target_total_db - fixed;
    if residual < T::zero() {
        return Err(domain(
            "target_total_db",
            as_f64(target_total_db),
            ">= fixed budget terms",
        ));
    }
    Ok(residual)
}

/// Detected sky-background photon rate (Hz) for the whole receiver:
/// L·A·Ω·Δλ·η / (h·c/λ).
pub fn background_count_rate<T: Real>(
    env: &BackgroundEnvironment<T>,
    rx_aperture_m: T,
    detector_efficiency: T,
) -> Result<T> {
    env.validate()?;
    if !(detector_efficiency > T::zero() && detector_efficiency <= T::one()) {
        return Err(domain(
            "detector_efficiency",
            as_f64(detector_efficiency),
            "0 < eta <= 1",
        ));
    }
    if !(rx_aperture_m > T::zero()) {
        return Err(domain("rx_aperture_m", as_f64(rx_aperture_m), "> 0"));
    }
    let two = T::lit(2.0);
    let area = T::PI() * (rx_aperture_m / two).powi(2);
    let solid_angle = T::PI() * (env.fov_full_angle_rad / two).powi(2);
    let photon_energy = T::lit(PLANCK) * T::lit(SPEED_OF_LIGHT) / env.wavelength_m;
    Ok(env.sky_spectral_radiance
        * area
        * solid_angle
        * env.filter_bandwidth_nm
        * detector_efficiency
        / photon_energy)
}

/// Sky radiance that produces `target_rate_hz` through [`background_count_rate`].
pub fn radiance_for_rate<T: Real>(
    env: &BackgroundEnvironment<T>,
    rx_aperture_m: T,
    detector_efficiency: T,
    target_rate_hz: T,
) -> Result<T> {
    let unit = BackgroundEnvironment {
        sky_spectral_radiance: T::one(),
        ..*env
    };
    Ok(target_rate_hz / background_count_rate(&unit, rx_aperture_m, detector_efficiency)?)
}

/// Rayleigh-scattered intensity at `lambda_new` relative to `lambda_ref` (∝ λ⁻⁴).
pub fn rayleigh_noise_ratio<T: Real>(lambda_ref: T, lambda_new: T) -> Result<T> {
    if !(lambda_ref > T::zero()) {
        return Err(domain("lambda_ref", as_f64(lambda_ref), "> 0"));
    }
    if !(lambda_new > T::zero()) {
        return Err(domain("lambda_new", as_f64(lambda_new), "> 0"));
    }
    Ok((lambda_ref / lambda_new).powi(4))
}

/// Conversion applied on top of the power ratio in [`combined_noise_ratio`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseRatioUnits<T> {
    /// Ratio of scattered optical power.
    Power,
    /// Ratio of photon counts: power ratio × λ_new/λ_ref.
    PhotonCount { lambda_ref: T, lambda_new: T },
}

/// Product of the solar-irradiance and scattering ratios, optionally
/// converted to a photon-count ratio.
pub fn combined_noise_ratio<T: Real>(
    solar_irradiance_ratio: T,
    rayleigh_ratio: T,
    units: NoiseRatioUnits<T>,
) -> Result<T> {
    if !(solar_irradiance_ratio > T::zero()) {
        return Err(domain(
            "solar_irradiance_ratio",
            as_f64(solar_irradiance_ratio),
            "> 0",
        ));
    }
    if !(rayleigh_ratio > T::zero()) {
        return Err(domain("rayleigh_ratio", as_f64(rayleigh_ratio), "> 0"));
    }
    let power = solar_irradiance_ratio * rayleigh_ratio;
    match units {
        NoiseRatioUnits::Power => Ok(power),
        NoiseRatioUnits::PhotonCount {
            lambda_ref,
            lambda_new,
        } => {
            if !(lambda_ref > T::zero() && lambda_new > T::zero()) {
                return Err(domain("lambda", as_f64(lambda_ref.min(lambda_new)), "> 0"));
            }
            Ok(power * lambda_new / lambda_ref)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundYield<T> {
    pub probability: T,
    /// Set when rate × window > 0.1 and the Poisson click model is a poor
    /// description of a gated detector.
    pub outside_linear_regime: bool,
}

/// Probability of at least one noise click per gate: 1 − exp(−rate·window).
pub fn background_yield<T: Real>(
    total_noise_rate_hz: T,
    gate_window_s: T,
) -> Result<BackgroundYield<T>> {
    if !(total_noise_rate_hz >= T::zero()) {
        return Err(domain(
            "total_noise_rate_hz",
            as_f64(total_noise_rate_hz),
            ">= 0",
        ));
    }
    if !(gate_window_s > T::zero()) {
        return Err(domain("gate_window_s", as_f64(gate_window_s), "> 0"));
    }
    let x = total_noise_rate_hz * gate_window_s;
    Ok(BackgroundYield {
        probability: -(-x).exp_m1(),
        outside_linear_regime: x > T::lit(0.1),
    })
}
