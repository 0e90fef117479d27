use serde::Serialize;

use super::decoy::DecoyEstimates;
use crate::error::{domain, Result};
use crate::primitives::binary_entropy;
use crate::scalar::Real;

/// Basis reconciliation factor of BB84 with symmetric basis choice.
pub const BASIS_FACTOR: f64 = 0.5;

/// Default error-correction inefficiency.
pub const DEFAULT_EC_INEFFICIENCY: f64 = 1.16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecureKeyRate<T> {
    /// q·p_μ·{−Q_μ f H₂(E_μ) + Q₁[1 − H₂(e₁)]}: secure bits per clock cycle.
    pub per_clock: T,
    /// q·{…}: secure bits per signal pulse.
    pub per_signal_pulse: T,
    /// The bracket was negative and both rates were clamped to zero.
    pub clamped: bool,
}

/// Asymptotic decoy-state key rate.
pub fn secure_key_rate<T: Real>(
    est: &DecoyEstimates<T>,
    q_mu: T,
    e_mu: T,
    f: T,
    q: T,
    p_mu: T,
) -> Result<SecureKeyRate<T>> {
    if !(f >= T::one()) {
        return Err(domain("f", f.to_f64().unwrap_or(f64::NAN), ">= 1"));
    }
    if !(q > T::zero() && q <= T::one()) {
        return Err(domain("q", q.to_f64().unwrap_or(f64::NAN), "in (0, 1]"));
    }
    if !(p_mu > T::zero() && p_mu <= T::one()) {
        return Err(domain(
            "p_mu",
            p_mu.to_f64().unwrap_or(f64::NAN),
            "in (0, 1]",
        ));
    }
    if !(q_mu >= T::zero() && q_mu <= T::one()) {
        return Err(domain(
            "q_mu",
            q_mu.to_f64().unwrap_or(f64::NAN),
            "in [0, 1]",
        ));
    }
    let bracket = -q_mu * f * binary_entropy(e_mu)?
        + est.q1_lower * (T::one() - binary_entropy(est.e1_upper)?);
    let (bracket, clamped) = if bracket > T::zero() {
        (bracket, false)
    } else {
        (T::zero(), true)
    };
    Ok(SecureKeyRate {
        per_clock: q * p_mu * bracket,
        per_signal_pulse: q * bracket,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::decoy::{decoy_bounds, DecoyInputs};
    use proptest::prelude::*;

    fn daylight_rate(f: f64) -> SecureKeyRate<f64> {
        let est = decoy_bounds(&DecoyInputs::daylight_run()).unwrap();
        secure_key_rate(&est, 1.63e-5, 0.0165, f, 0.5, 0.5).unwrap()
    }

    #[test]
    fn no_single_photons_no_key() {
        let est = DecoyEstimates {
            y1_lower: 0.0,
            e1_upper: 0.0,
            q1_lower: 0.0,
            clamped: false,
            e1_above_half: false,
        };
        let r = secure_key_rate(&est, 1.63e-5, 0.0165, 1.16, 0.5, 0.5).unwrap();
        assert_eq!(r.per_clock, 0.0);
        assert_eq!(r.per_signal_pulse, 0.0);
        assert!(r.clamped);
    }

    #[test]
    fn daylight_rates_at_default_f() {
        // 40-digit evaluation at f = 1.16: q-only 2.908325e-6, q·p_mu 1.454162e-6
        let r = daylight_rate(1.16);
        assert!((r.per_signal_pulse / 2.908_324_689e-6 - 1.0).abs() < 1e-8);
        assert!((r.per_signal_pulse / 2.9e-6 - 1.0).abs() < 0.05);
        assert!((r.per_clock / 1.45e-6 - 1.0).abs() < 0.05);
        let total = r.per_clock * 1e8 * 464.0;
        assert!((total / 6.75e4 - 1.0).abs() < 0.01);
    }

    #[test]
    fn daylight_rates_across_f_range() {
        // f = 1.10 → 2.967645e-6, f = 1.22 → 2.849004e-6
        assert!((daylight_rate(1.10).per_signal_pulse / 2.967_645_244e-6 - 1.0).abs() < 1e-8);
        assert!((daylight_rate(1.22).per_signal_pulse / 2.849_004_133e-6 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_sub_shannon_f() {
        let est = decoy_bounds(&DecoyInputs::daylight_run()).unwrap();
        assert!(secure_key_rate(&est, 1.63e-5, 0.0165, 0.9, 0.5, 0.5).is_err());
        assert!(secure_key_rate(&est, 1.63e-5, 0.0165, 1.1, 0.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_error_rates_and_single_photon_gain(
            e_mu in 0.0_f64..0.2, de in 0.0_f64..0.1,
            e1 in 0.0_f64..0.3, de1 in 0.0_f64..0.2,
            q1 in 0.0_f64..1e-4, dq1 in 0.0_f64..1e-4,
        ) {
            let est = |q1: f64, e1: f64| DecoyEstimates { y1_lower: 0.0, e1_upper: e1, q1_lower: q1, clamped: false, e1_above_half: false };
            let r = |q1, e1, e_mu| secure_key_rate(&est(q1, e1), 1.63e-5, e_mu, 1.16, 0.5, 0.5).unwrap().per_clock;
            let base = r(q1, e1, e_mu);
            prop_assert!(base >= 0.0);
            prop_assert!(r(q1, e1, e_mu + de) <= base + 1e-18);
            prop_assert!(r(q1, (e1 + de1).min(0.5), e_mu) <= base + 1e-18);
            prop_assert!(r(q1 + dq1, e1, e_mu) >= base - 1e-18);
        }
    }
}
