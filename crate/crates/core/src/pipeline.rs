//! End-to-end run of a scenario: session, estimation, key rate and optional
//! post-processing, collected into one reproducible report.

use bitvec::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::postproc::{privacy_amplify, reconcile, ReconciliationResult, SiftedKeyPair};
use crate::primitives::split_seed;
use crate::protocol::{
    key_rate_report, run_session, run_session_with_key, secure_key_rate, KeyRateReport, TallySet,
};
use crate::scenario::{BudgetLedger, Scenario};

const AMPLIFY_STREAM: u64 = 0xa3a1_1f1e;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageLedger {
    pub sifted_signal_bits: usize,
    pub qber_estimate: f64,
    pub reconciliation: Option<ReconciliationResult>,
    /// Key rate per signal pulse with the measured inefficiency in place of f.
    pub r_pulse_achieved_f: Option<f64>,
    pub target_length: Option<i64>,
    pub final_key_bits: usize,
    pub final_keys_identical: bool,
    /// SHA-256 of Alice's final key, for comparing runs without exposing it.
    pub final_key_sha256: Option<String>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub alice_key: BitVec<u64, Lsb0>,
    #[serde(skip)]
    pub bob_key: BitVec<u64, Lsb0>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub scenario_sha256: String,
    pub seed: u64,
    pub tally: TallySet,
    pub report: KeyRateReport,
    pub budget: BudgetLedger,
    pub postproc: Option<LeakageLedger>,
}

impl SimulationReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn simulate(scenario: &Scenario, scenario_sha256: &str, seed: u64) -> Result<SimulationReport> {
    scenario.validate()?;
    let cfg = scenario.session_config()?;
    let budget = scenario.budget()?;
    let params = scenario.rate_parameters();

    let (tally, bits) = if scenario.postproc.enabled {
        let out = run_session_with_key(&cfg, seed)?;
        (out.tally, Some(out.signal_bits))
    } else {
        (run_session(&cfg, seed)?, None)
    };
    let report = key_rate_report(&tally, &params, scenario.protocol.gain_normalization)?;

    let postproc = match bits {
        Some(bits) => {
            let pair = SiftedKeyPair::new(bits.alice, bits.bob, report.e_mu)?;
            Some(post_process(scenario, &report, &pair, seed)?)
        }
        None => None,
    };

    Ok(SimulationReport {
        scenario_sha256: scenario_sha256.to_string(),
        seed,
        tally,
        report,
        budget,
        postproc,
    })
}

/// Reconciliation and privacy amplification of a sifted signal key. Refusals
/// and empty keys are recorded in the ledger rather than returned as errors.
pub fn post_process(
    scenario: &Scenario,
    report: &KeyRateReport,
    pair: &SiftedKeyPair,
    seed: u64,
) -> Result<LeakageLedger> {
    let mut ledger = LeakageLedger {
        sifted_signal_bits: pair.len(),
        qber_estimate: pair.qber_estimate,
        reconciliation: None,
        r_pulse_achieved_f: None,
        target_length: None,
        final_key_bits: 0,
        final_keys_identical: false,
        final_key_sha256: None,
        notes: Vec::new(),
        alice_key: BitVec::new(),
        bob_key: BitVec::new(),
    };
    let Some(est) = report.estimates else {
        ledger
            .notes
            .push("no decoy estimates; post-processing skipped".into());
        return Ok(ledger);
    };
    let rec = match reconcile(pair, &scenario.reconcile_config(seed)) {
        Ok(r) => r,
        Err(e @ (Error::ReconciliationRefused { .. } | Error::KeyTooShort { .. })) => {
            ledger.notes.push(e.to_string());
            return Ok(ledger);
        }
        Err(e) => return Err(e),
    };
    if let Some(f) = rec.achieved_f {
        let rate = secure_key_rate(
            &est,
            report.q_mu,
            report.e_mu,
            f.max(1.0),
            report.q,
            report.p_mu,
        )?;
        ledger.r_pulse_achieved_f = Some(rate.per_signal_pulse);
    }
    if rec.success {
        let pa_seed = split_seed(seed, AMPLIFY_STREAM);
        let alice = privacy_amplify(&rec.alice_bits, rec.leaked_bits, &est, report.q_mu, pa_seed)?;
        let bob = privacy_amplify(
            &rec.corrected_bits,
            rec.leaked_bits,
            &est,
            report.q_mu,
            pa_seed,
        )?;
        ledger.target_length = Some(alice.target_length);
        ledger.final_key_bits = alice.key.len();
        ledger.final_keys_identical = alice.key == bob.key;
        if alice.empty {
            ledger
                .notes
                .push("secure length not positive; final key empty".into());
        } else {
            let bytes: Vec<u8> = alice.key.iter().by_vals().map(u8::from).collect();
            ledger.final_key_sha256 = Some(hex::encode(Sha256::digest(&bytes)));
        }
        ledger.alice_key = alice.key;
        ledger.bob_key = bob.key;
    } else {
        ledger
            .notes
            .push("verification failed; no key extracted".into());
    }
    ledger.reconciliation = Some(rec);
    Ok(ledger)
}
