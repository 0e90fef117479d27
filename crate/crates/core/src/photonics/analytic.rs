use crate::error::{domain, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainQber<T> {
    pub gain: T,
    /// `None` when the gain is zero.
    pub qber: Option<T>,
}

/// Expected gain and QBER of a Poisson source with mean `mu` through a channel
/// of end-to-end transmittance `eta`:
///
/// Q = Y₀ + 1 − e^(−ημ),  E·Q = e₀·Y₀ + e_det·(1 − e^(−ημ)).
pub fn analytic_gain_qber<T: Real>(mu: T, eta: T, y0: T, e_det: T, e0: T) -> Result<GainQber<T>> {
    let unit = |name: &'static str, v: T| -> Result<()> {
        if v >= T::zero() && v <= T::one() {
            Ok(())
        } else {
            Err(domain(
                name,
                v.to_f64().unwrap_or(f64::NAN),
                "probability in [0, 1]",
            ))
        }
    };
    unit("eta", eta)?;
    unit("y0", y0)?;
    unit("e_det", e_det)?;
    unit("e0", e0)?;
    if !(mu >= T::zero()) {
        return Err(domain("mu", mu.to_f64().unwrap_or(f64::NAN), ">= 0"));
    }
    let detected = -(-eta * mu).exp_m1();
    let gain = y0 + detected;
    let errors = e0 * y0 + e_det * detected;
    let qber = (gain > T::zero()).then(|| errors / gain);
    Ok(GainQber { gain, qber })
}
