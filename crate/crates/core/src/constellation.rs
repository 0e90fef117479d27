//! Sunlit and eclipse fractions of circular orbits under a cylindrical umbra.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const GEO_ALTITUDE_KM: f64 = 35786.0;
pub const OBLIQUITY_DEG: f64 = 23.44;
pub const DEFAULT_LEO_INCLINATION_DEG: f64 = 51.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSpec<T> {
    pub altitude_km: T,
    pub beta_deg: T,
}

impl<T: Real> OrbitSpec<T> {
    pub fn new(altitude_km: T, beta_deg: T) -> Result<Self> {
        if !(altitude_km > T::zero() && altitude_km.is_finite()) {
            return Err(domain(
                "altitude_km",
                altitude_km.to_f64().unwrap_or(f64::NAN),
                "> 0",
            ));
        }
        if !(beta_deg.abs() <= T::lit(90.0)) {
            return Err(domain(
                "beta_deg",
                beta_deg.to_f64().unwrap_or(f64::NAN),
                "|beta| <= 90",
            ));
        }
        Ok(Self {
            altitude_km,
            beta_deg,
        })
    }
}

/// Fraction of the period spent in umbra:
/// (1/π)·arccos(√(h² + 2Rh) / (r cos β)) when r cos β exceeds √(h² + 2Rh).
pub fn eclipse_fraction<T: Real>(orbit: &OrbitSpec<T>) -> T {
    let h = orbit.altitude_km;
    let r_earth = T::lit(EARTH_RADIUS_KM);
    let r = r_earth + h;
    let horizon = (h * h + T::lit(2.0) * r_earth * h).sqrt();
    let projected = r * orbit.beta_deg.to_radians().cos();
    if projected > horizon {
        (horizon / projected).acos() / T::PI()
    } else {
        T::zero()
    }
}

/// β values sampled over one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaProfile<T> {
    pub beta_deg: Vec<T>,
}

impl<T: Real> BetaProfile<T> {
    /// Equatorial orbit: β follows the solar declination, one sample per day.
    pub fn solar_declination() -> Self {
        let eps = T::lit(OBLIQUITY_DEG);
        let days = 365;
        let beta_deg = (0..days)
            .map(|d| eps * (T::TAU() * T::lit(d as f64) / T::lit(days as f64)).sin())
            .collect();
        Self { beta_deg }
    }

    /// Uniform sweep over solar longitude Γ (daily) and node longitude Ω
    /// (every 10°), covering the β range reachable at `inclination_deg`:
    /// sin β = cos Γ sin Ω sin i − sin Γ cos ε cos Ω sin i + sin Γ sin ε cos i.
    pub fn precession_sweep(inclination_deg: T) -> Self {
        let i = inclination_deg.to_radians();
        let eps = T::lit(OBLIQUITY_DEG).to_radians();
        let (days, nodes) = (365, 36);
        let mut beta_deg = Vec::with_capacity(days * nodes);
        for o in 0..nodes {
            let node = T::TAU() * T::lit(o as f64) / T::lit(nodes as f64);
            for d in 0..days {
                let g = T::TAU() * T::lit(d as f64) / T::lit(days as f64);
                let s = g.cos() * node.sin() * i.sin() - g.sin() * eps.cos() * node.cos() * i.sin()
                    + g.sin() * eps.sin() * i.cos();
                beta_deg.push(s.max(-T::one()).min(T::one()).asin().to_degrees());
            }
        }
        Self { beta_deg }
    }

    pub fn max_abs(&self) -> T {
        self.beta_deg.iter().fold(T::zero(), |m, b| m.max(b.abs()))
    }

    pub fn min_abs(&self) -> T {
        self.beta_deg
            .iter()
            .fold(T::infinity(), |m, b| m.min(b.abs()))
    }
}

/// 1 − mean eclipse fraction over the profile.
pub fn annual_sunlit_fraction<T: Real>(altitude_km: T, profile: &BetaProfile<T>) -> Result<T> {
    if profile.beta_deg.len() < 365 {
        return Err(domain(
            "beta_profile",
            profile.beta_deg.len() as f64,
            "at least 365 samples",
        ));
    }
    let mut sum = T::zero();
    for &b in &profile.beta_deg {
        sum = sum + eclipse_fraction(&OrbitSpec::new(altitude_km, b)?);
    }
    Ok(T::one() - sum / T::lit(profile.beta_deg.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub altitude_km: T,
    pub worst_case_eclipse_fraction: T,
    pub annual_sunlit_fraction: T,
}

pub const SWEEP_CSV_HEADER: &str = "altitude_km,worst_case_eclipse_fraction,annual_sunlit_fraction";

/// Altitude sweep. The annual profile is the solar declination at and above
/// GEO altitude and the precession sweep at `inclination_deg` below it.
pub fn altitude_sweep<T: Real>(altitudes_km: &[T], inclination_deg: T) -> Result<Vec<SweepRow<T>>> {
    let leo = BetaProfile::precession_sweep(inclination_deg);
    let geo = BetaProfile::solar_declination();
    altitudes_km
        .iter()
        .map(|&h| {
            let profile = if h >= T::lit(GEO_ALTITUDE_KM) {
                &geo
            } else {
                &leo
            };
            Ok(SweepRow {
                altitude_km: h,
                worst_case_eclipse_fraction: eclipse_fraction(&OrbitSpec::new(h, T::zero())?),
                annual_sunlit_fraction: annual_sunlit_fraction(h, profile)?,
            })
        })
        .collect()
}

/// Geometric grid of `points` altitudes from `lo_km` to `hi_km` inclusive.
pub fn log_spaced_altitudes(lo_km: f64, hi_km: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo_km],
        _ => (0..points)
            .map(|k| lo_km * (hi_km / lo_km).powf(k as f64 / (points - 1) as f64))
            .collect(),
    }
}
