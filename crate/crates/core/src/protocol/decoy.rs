use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Observed rates fed to the vacuum + weak-decoy estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoyInputs<T> {
    pub q_mu: T,
    pub q_nu: T,
    pub y0: T,
    pub e_nu: T,
    pub mu: T,
    pub nu: T,
}

impl DecoyInputs<f64> {
    /// Measured values of the 464 s daylight run.
    pub fn daylight_run() -> Self {
        Self {
            q_mu: 1.63e-5,
            q_nu: 4.11e-6,
            y0: 2.38e-7,
            e_nu: 0.0335,
            mu: 0.6,
            nu: 0.14,
        }
    }
}

/// Single-photon bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoyEstimates<T> {
    pub y1_lower: T,
    pub e1_upper: T,
    pub q1_lower: T,
    /// A bound left [0, 1] and was clamped.
    pub clamped: bool,
    /// e₁ above 1/2: no key can be distilled from single photons.
    pub e1_above_half: bool,
}

/// Vacuum + weak-decoy bounds on the single-photon yield and error rate:
///
/// Y₁ ≥ μ/(μν − ν²)·[Q_ν e^ν − Q_μ e^μ ν²/μ² − (μ² − ν²)/μ²·Y₀]
/// e₁ ≤ (E_ν Q_ν e^ν − Y₀/2) / (Y₁ ν)
/// Q₁ ≥ Y₁ μ e^(−μ)
pub fn decoy_bounds<T: Real>(inputs: &DecoyInputs<T>) -> Result<DecoyEstimates<T>> {
    let DecoyInputs {
        q_mu,
        q_nu,
        y0,
        e_nu,
        mu,
        nu,
    } = *inputs;
    for (name, v) in [("q_mu", q_mu), ("q_nu", q_nu), ("y0", y0), ("e_nu", e_nu)] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(domain(
                name,
                v.to_f64().unwrap_or(f64::NAN),
                "rate in [0, 1]",
            ));
        }
    }
    if !(nu > T::zero() && mu > nu) {
        return Err(domain("nu", nu.to_f64().unwrap_or(f64::NAN), "0 < nu < mu"));
    }
    let half = T::lit(0.5);
    let mu2 = mu * mu;
    let nu2 = nu * nu;
    let bracket = q_nu * nu.exp() - q_mu * mu.exp() * nu2 / mu2 - (mu2 - nu2) / mu2 * y0;
    let y1 = mu / (mu * nu - nu2) * bracket;
    if !(y1 > T::zero()) {
        return Err(Error::EstimationFailure {
            y1_lower: y1.to_f64().unwrap_or(f64::NAN),
        });
    }
    let e1 = (e_nu * q_nu * nu.exp() - half * y0) / (y1 * nu);

    let mut clamped = false;
    let mut clamp = |v: T| {
        if v < T::zero() {
            clamped = true;
            T::zero()
        } else if v > T::one() {
            clamped = true;
            T::one()
        } else {
            v
        }
    };
    let y1 = clamp(y1);
    let e1 = clamp(e1);
    Ok(DecoyEstimates {
        y1_lower: y1,
        e1_upper: e1,
        q1_lower: y1 * mu * (-mu).exp(),
        clamped,
        e1_above_half: e1 > half,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonics::analytic_gain_qber;

    #[test]
    fn daylight_bounds() {
        // 40-digit evaluation: Y1 = 2.688404e-5, e1 = 1.046172e-2, Q1 = 8.852565e-6
        let est = decoy_bounds(&DecoyInputs::daylight_run()).unwrap();
        assert!((est.y1_lower / 2.688_404_240e-5 - 1.0).abs() < 1e-8);
        assert!((est.e1_upper / 1.046_171_538e-2 - 1.0).abs() < 1e-8);
        assert!((est.q1_lower / 8.852_565_178e-6 - 1.0).abs() < 1e-8);
        assert!((est.y1_lower / 2.69e-5 - 1.0).abs() < 0.01);
        assert!((est.e1_upper / 1.05e-2 - 1.0).abs() < 0.02);
        assert!((est.q1_lower / 8.85e-6 - 1.0).abs() < 0.01);
        assert!(!est.clamped && !est.e1_above_half);
    }

    #[test]
    fn daylight_bounds_in_f32() {
        let i = DecoyInputs::<f32> {
            q_mu: 1.63e-5,
            q_nu: 4.11e-6,
            y0: 2.38e-7,
            e_nu: 0.0335,
            mu: 0.6,
            nu: 0.14,
        };
        let est = decoy_bounds(&i).unwrap();
        assert!((est.y1_lower / 2.688_404e-5 - 1.0).abs() < 1e-4);
        assert!((est.e1_upper / 1.046_172e-2 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn perfect_single_photon_channel() {
        let (mu, nu, eta) = (0.6_f64, 0.14, 1e-3);
        let q_mu = analytic_gain_qber(mu, eta, 0.0, 0.0, 0.5).unwrap();
        let q_nu = analytic_gain_qber(nu, eta, 0.0, 0.0, 0.5).unwrap();
        let est = decoy_bounds(&DecoyInputs {
            q_mu: q_mu.gain,
            q_nu: q_nu.gain,
            y0: 0.0,
            e_nu: q_nu.qber.unwrap(),
            mu,
            nu,
        })
        .unwrap();
        assert!(est.e1_upper.abs() < 1e-12_f64);
        assert!(est.y1_lower <= eta);
    }

    #[test]
    fn zeroed_bracket_fails() {
        let (mu, nu, q_nu) = (0.6_f64, 0.14_f64, 4.11e-6_f64);
        let y0 = q_nu * nu.exp() * mu * mu / (mu * mu - nu * nu);
        let r = decoy_bounds(&DecoyInputs {
            q_mu: 1.63e-5,
            q_nu,
            y0,
            e_nu: 0.0335,
            mu,
            nu,
        });
        assert!(matches!(r, Err(Error::EstimationFailure { .. })));
    }

    #[test]
    fn rejects_bad_intensities() {
        let mut i = DecoyInputs::daylight_run();
        i.nu = 0.7;
        assert!(decoy_bounds(&i).is_err());
        i.nu = 0.0;
        assert!(decoy_bounds(&i).is_err());
    }

    #[test]
    fn error_bound_clamps_and_flags() {
        let mut i = DecoyInputs::daylight_run();
        i.e_nu = 1.0;
        i.y0 = 0.0;
        let est = decoy_bounds(&i).unwrap();
        assert!(est.e1_above_half);
    }
}
