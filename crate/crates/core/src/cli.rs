//! Command-line front end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::constellation::{altitude_sweep, log_spaced_altitudes, SWEEP_CSV_HEADER};
use crate::error::{Error, Result};
use crate::pipeline::{self, post_process};
use crate::postproc::{write_key_file, SiftedKeyPair};
use crate::primitives::RandomStream;
use crate::protocol::{
    decoy_bounds, key_rate_report, secure_key_rate, DecoyEstimates, DecoyInputs, SecureKeyRate,
    TallySet, BASIS_FACTOR, DEFAULT_EC_INEFFICIENCY,
};
use crate::scenario::Scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "daylight-qkd",
    version,
    about = "Daylight free-space decoy-state BB84 simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a full session and report gains, error rates and key rates.
    Simulate(SimulateArgs),
    /// Itemized loss budget and background terms of a scenario.
    Budget(ScenarioArgs),
    /// Decoy-state bounds and key rate from measured gains.
    Decoy(DecoyArgs),
    /// Eclipse and sunlit fractions over an altitude sweep.
    Constellation(ConstellationArgs),
    /// Reconcile and amplify a simulated sifted key at a given QBER.
    Postproc(PostprocArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides `protocol.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving report.json, report.csv and, when a final key was
    /// extracted, alice.key and bob.key; stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DecoyArgs {
    #[arg(long)]
    pub q_mu: f64,
    #[arg(long)]
    pub q_nu: f64,
    #[arg(long)]
    pub y0: f64,
    #[arg(long)]
    pub e_nu: f64,
    #[arg(long, default_value_t = 0.6)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.14)]
    pub nu: f64,
    /// Signal QBER; defaults to the value measured alongside the other inputs.
    #[arg(long, default_value_t = 0.0165)]
    pub e_mu: f64,
    #[arg(long, default_value_t = DEFAULT_EC_INEFFICIENCY)]
    pub f: f64,
    #[arg(long, default_value_t = BASIS_FACTOR)]
    pub q: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p_mu: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ConstellationArgs {
    /// Takes sweep parameters from the scenario's `[constellation]` table.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub min_km: Option<f64>,
    #[arg(long)]
    pub max_km: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub inclination_deg: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PostprocArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sifted key length.
    #[arg(long, default_value_t = 1_000_000)]
    pub bits: usize,
    /// Defaults to the report's E_mu.
    #[arg(long)]
    pub qber: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    issues: Option<&'a [crate::error::ValidationIssue]>,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Validation(_) | Error::Parse(_) | Error::Domain { .. } => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

/// Machine-readable error document printed on stderr.
pub fn error_json(err: &Error) -> String {
    let (kind, issues) = match err {
        Error::Validation(issues) => ("validation", Some(issues.as_slice())),
        Error::Parse(_) => ("parse", None),
        Error::Domain { .. } => ("domain", None),
        Error::Io(_) => ("io", None),
        _ => ("runtime", None),
    };
    let body = ErrorBody {
        error: kind,
        message: err.to_string(),
        issues,
    };
    serde_json::to_string(&body).unwrap_or_else(|_| format!("{{\"error\":\"{kind}\"}}"))
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Budget(a) => cmd_budget(a),
        Command::Decoy(a) => cmd_decoy(a),
        Command::Constellation(a) => cmd_constellation(a),
        Command::Postproc(a) => cmd_postproc(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let (scenario, sha) = Scenario::load(&a.scenario)?;
    let seed = a.seed.unwrap_or(scenario.protocol.seed);
    let report = pipeline::simulate(&scenario, &sha, seed)?;
    let json = report.to_json()?;
    let csv = report.report.csv();
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("report.json"), &json)?;
            std::fs::write(dir.join("report.csv"), &csv)?;
            if let Some(ledger) = report.postproc.as_ref().filter(|l| !l.alice_key.is_empty()) {
                write_key_file(&dir.join("alice.key"), &ledger.alice_key, seed)?;
                write_key_file(&dir.join("bob.key"), &ledger.bob_key, seed)?;
            }
        }
        None => match a.format {
            Format::Json => print!("{json}"),
            Format::Csv => print!("{csv}"),
        },
    }
    Ok(())
}

pub fn cmd_budget(a: &ScenarioArgs) -> Result<()> {
    let (scenario, _) = Scenario::load(&a.scenario)?;
    let b = scenario.budget()?;
    let text = match a.format {
        Format::Json => json(&b)?,
        Format::Csv => {
            let mut s = String::from("item,loss_db\n");
            for (name, db) in b.items.rows() {
                let _ = writeln!(s, "{name},{db:.6}");
            }
            let _ = writeln!(s, "detector_efficiency,{:.6}", b.detector_efficiency_db);
            let _ = writeln!(s, "link_total,{:.6}", b.link_total_db);
            let _ = writeln!(s, "end_to_end,{:.6}", b.end_to_end_db);
            s
        }
    };
    emit(a.out.as_deref(), &text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoyOutput {
    pub inputs: DecoyInputs<f64>,
    pub estimates: DecoyEstimates<f64>,
    pub e_mu: f64,
    pub f: f64,
    pub q: f64,
    pub p_mu: f64,
    pub rate: SecureKeyRate<f64>,
}

pub fn decoy_output(a: &DecoyArgs) -> Result<DecoyOutput> {
    let inputs = DecoyInputs {
        q_mu: a.q_mu,
        q_nu: a.q_nu,
        y0: a.y0,
        e_nu: a.e_nu,
        mu: a.mu,
        nu: a.nu,
    };
    let estimates = decoy_bounds(&inputs)?;
    let rate = secure_key_rate(&estimates, a.q_mu, a.e_mu, a.f, a.q, a.p_mu)?;
    Ok(DecoyOutput {
        inputs,
        estimates,
        e_mu: a.e_mu,
        f: a.f,
        q: a.q,
        p_mu: a.p_mu,
        rate,
    })
}

pub fn cmd_decoy(a: &DecoyArgs) -> Result<()> {
    let out = decoy_output(a)?;
    let text = match a.format {
        Format::Json => json(&out)?,
        Format::Csv => format!(
            "Y1_lower,e1_upper,Q1_lower,R_pulse,R_pulse_qp\n{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n",
            out.estimates.y1_lower,
            out.estimates.e1_upper,
            out.estimates.q1_lower,
            out.rate.per_signal_pulse,
            out.rate.per_clock
        ),
    };
    emit(a.out.as_deref(), &text)
}

pub fn cmd_constellation(a: &ConstellationArgs) -> Result<()> {
    let mut c = match &a.scenario {
        Some(path) => Scenario::load(path)?.0.constellation,
        None => Default::default(),
    };
    c.altitude_min_km = a.min_km.unwrap_or(c.altitude_min_km);
    c.altitude_max_km = a.max_km.unwrap_or(c.altitude_max_km);
    c.points = a.points.unwrap_or(c.points);
    c.inclination_deg = a.inclination_deg.unwrap_or(c.inclination_deg);
    if !(c.altitude_min_km > 0.0 && c.altitude_max_km >= c.altitude_min_km) {
        return Err(Error::Validation(vec![crate::error::ValidationIssue::new(
            "constellation.altitude_min_km",
            "need 0 < min <= max",
        )]));
    }
    let rows = altitude_sweep(
        &log_spaced_altitudes(c.altitude_min_km, c.altitude_max_km, c.points),
        c.inclination_deg,
    )?;
    let text = match a.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = format!("{SWEEP_CSV_HEADER}\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:.3},{:.6},{:.6}",
                    r.altitude_km, r.worst_case_eclipse_fraction, r.annual_sunlit_fraction
                );
            }
            s
        }
    };
    emit(a.out.as_deref(), &text)
}

pub fn cmd_postproc(a: &PostprocArgs) -> Result<()> {
    let (scenario, sha) = Scenario::load(&a.scenario)?;
    let seed = a.seed.unwrap_or(scenario.protocol.seed);
    let params = scenario.rate_parameters();
    // The session supplies gains and bounds; the key itself is drawn at `qber`.
    let cfg = scenario.session_config()?;
    let tally = crate::protocol::run_session(&cfg, seed)?;
    let report = key_rate_report(&tally, &params, scenario.protocol.gain_normalization)?;
    let qber = a.qber.unwrap_or(report.e_mu);
    let mut rng = RandomStream::new(seed).split(1);
    let pair = SiftedKeyPair::simulate(a.bits, qber, &mut rng);
    let ledger = post_process(&scenario, &report, &pair, seed)?;

    #[derive(Serialize)]
    struct Out<'a> {
        scenario_sha256: &'a str,
        seed: u64,
        tally: TallySet,
        ledger: &'a pipeline::LeakageLedger,
    }
    let text = match a.format {
        Format::Json => json(&Out {
            scenario_sha256: &sha,
            seed,
            tally,
            ledger: &ledger,
        })?,
        Format::Csv => {
            let rec = ledger.reconciliation.as_ref();
            format!(
                "sifted_bits,qber,leaked_bits,achieved_f,failed_blocks,final_key_bits,identical\n{},{:.6},{},{},{},{},{}\n",
                ledger.sifted_signal_bits,
                ledger.qber_estimate,
                rec.map_or(0, |r| r.leaked_bits),
                rec.and_then(|r| r.achieved_f).map_or(String::new(), |f| format!("{f:.4}")),
                rec.map_or(0, |r| r.failed_blocks),
                ledger.final_key_bits,
                ledger.final_keys_identical
            )
        }
    };
    emit(a.out.as_deref(), &text)
}
