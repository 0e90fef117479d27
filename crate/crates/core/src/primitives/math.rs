use crate::error::{domain, Result};
use crate::scalar::Real;

/// Binary Shannon entropy H₂(e) in bits, with 0·log 0 taken as 0.
pub fn binary_entropy<T: Real>(e: T) -> Result<T> {
    if !(e >= T::zero() && e <= T::one()) {
        return Err(domain("e", e.to_f64().unwrap_or(f64::NAN), "0 <= e <= 1"));
    }
    if e == T::zero() || e == T::one() {
        return Ok(T::zero());
    }
    let q = T::one() - e;
    Ok(-e * e.log2() - q * q.log2())
}

/// 10^(−loss/10).
pub fn db_to_transmittance<T: Real>(loss_db: T) -> Result<T> {
    if !(loss_db >= T::zero()) {
        return Err(domain(
            "loss_db",
            loss_db.to_f64().unwrap_or(f64::NAN),
            "loss >= 0 dB",
        ));
    }
    Ok(T::lit(10.0).powf(-loss_db / T::lit(10.0)))
}

/// −10·log₁₀(t). Inverse of [`db_to_transmittance`].
pub fn transmittance_to_db<T: Real>(transmittance: T) -> Result<T> {
    if !(transmittance > T::zero() && transmittance <= T::one()) {
        return Err(domain(
            "transmittance",
            transmittance.to_f64().unwrap_or(f64::NAN),
            "0 < t <= 1",
        ));
    }
    Ok(-T::lit(10.0) * transmittance.log10())
}
