use daylight_qkd::photonics::analytic_gain_qber;
use daylight_qkd::protocol::{decoy_bounds, DecoyInputs};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    // Photon-number-resolved channel with Y_n = Y0 + 1 − (1 − η)^n: the bounds
    // must never exceed the true single-photon yield or undercut its error rate.
    #[test]
    fn bounds_hold_on_exact_channel(
        log_eta in -5.0f64..-1.0,
        log_y0 in -8.0f64..-4.0,
        e_det in 0.0f64..0.05,
        mu in 0.3f64..0.9,
        nu_frac in 0.05f64..0.5,
    ) {
        let eta = 10f64.powf(log_eta);
        let y0 = 10f64.powf(log_y0);
        let nu = mu * nu_frac;
        let q_mu = analytic_gain_qber(mu, eta, y0, e_det, 0.5).unwrap();
        let q_nu = analytic_gain_qber(nu, eta, y0, e_det, 0.5).unwrap();
        let inputs = DecoyInputs {
            q_mu: q_mu.gain,
            q_nu: q_nu.gain,
            y0,
            e_nu: q_nu.qber.unwrap(),
            mu,
            nu,
        };
        let y1 = y0 + eta;
        let e1 = (0.5 * y0 + e_det * eta) / y1;
        if let Ok(est) = decoy_bounds(&inputs) {
            prop_assert!(est.y1_lower <= y1 * (1.0 + 1e-9));
            prop_assert!(est.e1_upper >= e1 * (1.0 - 1e-9));
            prop_assert!(est.q1_lower <= y1 * mu * (-mu).exp() * (1.0 + 1e-9));
        }
    }
}
