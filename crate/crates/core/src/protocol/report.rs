//! Report row: measured gains and error rates, bounds and key rates.

use serde::Serialize;

use super::decoy::{decoy_bounds, DecoyEstimates, DecoyInputs};
use super::gains::{estimate_gains, GainEstimates, GainNormalization};
use super::keyrate::secure_key_rate;
use super::tally::TallySet;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "T,Q_mu,Q_nu,Y0,E_mu,E_nu,R_pulse,R_total";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateParameters {
    pub clock_rate_hz: f64,
    pub duration_s: f64,
    pub mu: f64,
    pub nu: f64,
    pub p_mu: f64,
    pub f: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyRateReport {
    #[serde(rename = "T")]
    pub t_s: f64,
    #[serde(rename = "Q_mu")]
    pub q_mu: f64,
    #[serde(rename = "Q_nu")]
    pub q_nu: f64,
    #[serde(rename = "Y0")]
    pub y0: f64,
    #[serde(rename = "E_mu")]
    pub e_mu: f64,
    #[serde(rename = "E_nu")]
    pub e_nu: f64,
    /// Secure bits per signal pulse (prefactor q).
    #[serde(rename = "R_pulse")]
    pub r_pulse: f64,
    /// ⌊R_pulse · p_μ · clock · T⌋.
    #[serde(rename = "R_total")]
    pub r_total: u64,
    /// Rate with the full q·p_μ prefactor, per clock cycle.
    #[serde(rename = "R_pulse_qp")]
    pub r_pulse_qp: f64,
    pub f_used: f64,
    pub q: f64,
    pub p_mu: f64,
    pub estimates: Option<DecoyEstimates<f64>>,
    pub gains: GainEstimates,
    pub flags: Vec<String>,
}

impl KeyRateReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6e},{:.6e},{:.6e},{:.6},{:.6},{:.6e},{}",
            self.t_s,
            self.q_mu,
            self.q_nu,
            self.y0,
            self.e_mu,
            self.e_nu,
            self.r_pulse,
            self.r_total
        )
    }

    pub fn csv(&self) -> String {
        format!("{CSV_HEADER}\n{}\n", self.csv_row())
    }
}

pub fn key_rate_report(
    tally: &TallySet,
    params: &RateParameters,
    norm: GainNormalization,
) -> Result<KeyRateReport> {
    let gains = estimate_gains(tally, norm)?;
    let mut flags = vec!["finite-size fluctuations not included in bounds".to_string()];
    let e_mu = gains.signal.qber.unwrap_or_else(|| {
        flags.push("no sifted signal clicks; E_mu undefined".into());
        0.0
    });
    let e_nu = gains.decoy.qber.unwrap_or_else(|| {
        flags.push("no sifted decoy clicks; E_nu undefined".into());
        0.0
    });
    let inputs = DecoyInputs {
        q_mu: gains.signal.gain,
        q_nu: gains.decoy.gain,
        y0: gains.vacuum.gain,
        e_nu,
        mu: params.mu,
        nu: params.nu,
    };
    let (estimates, r_pulse, r_pulse_qp) = match decoy_bounds(&inputs) {
        Ok(est) => {
            if est.clamped {
                flags.push("decoy bound clamped to [0, 1]".into());
            }
            if est.e1_above_half {
                flags.push("single-photon error bound above 1/2".into());
            }
            let rate = secure_key_rate(&est, inputs.q_mu, e_mu, params.f, params.q, params.p_mu)?;
            if rate.clamped {
                flags.push("key rate clamped to zero".into());
            }
            (Some(est), rate.per_signal_pulse, rate.per_clock)
        }
        Err(Error::EstimationFailure { y1_lower }) => {
            flags.push(format!(
                "decoy estimation failed (Y1 lower bound {y1_lower:e})"
            ));
            (None, 0.0, 0.0)
        }
        Err(e) => return Err(e),
    };
    let r_total = (r_pulse * params.p_mu * params.clock_rate_hz * params.duration_s).floor() as u64;
    Ok(KeyRateReport {
        t_s: params.duration_s,
        q_mu: inputs.q_mu,
        q_nu: inputs.q_nu,
        y0: inputs.y0,
        e_mu,
        e_nu,
        r_pulse,
        r_total,
        r_pulse_qp,
        f_used: params.f,
        q: params.q,
        p_mu: params.p_mu,
        estimates,
        gains,
        flags,
    })
}
