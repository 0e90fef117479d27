use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use daylight_qkd::scenario::DAYLIGHT_SCENARIO;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_daylight-qkd"))
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/daylight_53km.scenario")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn write_scenario(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("s.scenario");
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn quick_scenario() -> String {
    DAYLIGHT_SCENARIO
        .replace("duration_s = 464.0", "duration_s = 0.5")
        .replace("enabled = true", "enabled = false")
}

#[test]
fn probabilities_not_summing_to_one_exit_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = quick_scenario().replace("vacuum_probability = 0.25", "vacuum_probability = 0.15");
    let path = write_scenario(dir.path(), &bad);
    let o = run(&["simulate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("source."), "{err}");
    assert!(err.contains("validation"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_keys_and_bad_syntax_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = quick_scenario().replace("[source]\n", "[source]\nbogus_key = 1\n");
    let path = write_scenario(dir.path(), &unknown);
    assert_eq!(
        run(&["budget", "--scenario", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let path = write_scenario(dir.path(), "[source\n");
    assert_eq!(
        run(&["budget", "--scenario", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn missing_scenario_file_is_a_runtime_error() {
    let o = run(&["budget", "--scenario", "/nonexistent/x.scenario"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2_and_help_exits_0() {
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn seed_flag_is_deterministic_and_overrides_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), &quick_scenario());
    let p = path.to_str().unwrap();
    let a = run(&["simulate", "--scenario", p, "--seed", "7"]);
    let b = run(&["simulate", "--scenario", p, "--seed", "7"]);
    let c = run(&["simulate", "--scenario", p, "--seed", "8"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["scenario_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_csv_matches_golden() {
    let o = run(&[
        "simulate",
        "--scenario",
        fixture().to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), include_str!("golden/daylight_report.csv"));
}

#[test]
fn simulate_out_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), &quick_scenario());
    let out = dir.path().join("run");
    let o = run(&[
        "simulate",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("T,Q_mu,Q_nu,Y0,E_mu,E_nu,R_pulse,R_total\n"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(json["report"]["Q_mu"].as_f64().unwrap() > 0.0);
}

#[test]
fn budget_csv_matches_golden() {
    let o = run(&[
        "budget",
        "--scenario",
        fixture().to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), include_str!("golden/daylight_budget.csv"));
}

#[test]
fn decoy_csv_matches_golden() {
    let o = run(&[
        "decoy", "--q-mu", "1.63e-5", "--q-nu", "4.11e-6", "--y0", "2.38e-7", "--e-nu", "0.0335",
        "--f", "1.10", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), include_str!("golden/daylight_decoy.csv"));
}

#[test]
fn constellation_csv_is_monotone_in_altitude() {
    // Below geostationary altitude every row shares the inclined-orbit beta profile.
    let o = run(&[
        "constellation",
        "--min-km",
        "300",
        "--max-km",
        "30000",
        "--points",
        "40",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("altitude_km,worst_case_eclipse_fraction,annual_sunlit_fraction")
    );
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(rows.len(), 40);
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0]);
        assert!(w[1][1] <= w[0][1] + 1e-12);
        assert!(w[1][2] >= w[0][2] - 1e-12);
    }
}

#[test]
fn inverted_altitude_range_exits_2() {
    let o = run(&["constellation", "--min-km", "1000", "--max-km", "500"]);
    assert_eq!(o.status.code(), Some(2));
}
