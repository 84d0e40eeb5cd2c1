//! Exit codes and golden outputs of the command-line tool.
//! Set `UPDATE_GOLDEN=1` to rewrite the golden files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn dieout(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dieout"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn check_golden(produced: &Path, name: &str) {
    let got = fs::read_to_string(produced).unwrap();
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, &got).unwrap();
    }
    let want = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {name}"));
    assert!(got == want, "{name} differs from its golden file");
}

#[test]
fn team_three_species() {
    let dir = tempfile::tempdir().unwrap();
    let o = dieout(dir.path(), &["team", "--config", &config("ex_specific.json")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("k = 1, members = 1"));
    check_golden(&dir.path().join("team.json"), "ex_specific_team.json");
}

#[test]
fn team_counts_for_the_generic_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = dieout(dir.path(), &["team", "--config", &config("seven_dim.json")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("k = 3, members = 10"));
    check_golden(&dir.path().join("team.json"), "seven_dim_team.json");
    let o = dieout(dir.path(), &["team", "--config", &config("fourteen.json")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("k = 3, members = 28"));
}

#[test]
fn team_too_large_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = dieout(dir.path(), &["team", "--config", &config("fourteen.json"), "--cap", "10"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"d\": 2}").unwrap();
    assert_eq!(code(&dieout(dir.path(), &["team", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&dieout(dir.path(), &["team", "--config", "/no/such/file.json"])), 2);
    assert_eq!(code(&dieout(dir.path(), &["team"])), 2);
    assert_eq!(code(&dieout(dir.path(), &["frobnicate"])), 2);
    let o = dieout(dir.path(), &["team", "--config", &config("ex_specific.json"), "--set-c", "9=1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn help_lists_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = dieout(dir.path(), &["--help"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for cmd in ["check-trophic", "team", "certify", "simulate", "verify", "halfplanes", "--out", "--config"] {
        assert!(text.contains(cmd), "help lacks {cmd}");
    }
}

#[test]
fn certify_oriented_balanced_and_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("ex_specific.json");
    let e = std::f64::consts::E.to_string();
    let o = dieout(dir.path(), &["certify", "--config", &cfg, "--set-c", "2=1", "--beta", &e]);
    assert_eq!(code(&o), 0);
    check_golden(&dir.path().join("certificates.json"), "ex_specific_certificates.json");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("certificates.json")).unwrap()).unwrap();
    let cert = &doc["certificates"][0];
    assert!((cert["a"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-15);
    assert!((cert["b"].as_f64().unwrap() - 8.0 / 3.0).abs() < 1e-15);

    let o = dieout(dir.path(), &["certify", "--config", &cfg]);
    assert_eq!(code(&o), 4);

    let square = dir.path().join("square.json");
    fs::write(
        &square,
        r#"{"d": 2, "dprime": 2, "C": ["-1", "-1"], "S": [["1", "0"], ["0", "1"]],
            "signal": {"kind": "constant", "z": ["0", "0"]}, "x0": [1, 1], "horizon": 1, "dt": 0.1}"#,
    )
    .unwrap();
    let o = dieout(dir.path(), &["certify", "--config", square.to_str().unwrap()]);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("kernel is trivial"));
}

#[test]
fn certify_from_trapping_region() {
    let dir = tempfile::tempdir().unwrap();
    let o = dieout(dir.path(), &["certify", "--config", &config("four_dim.json"), "--from-trap"]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("certificates.json")).unwrap()).unwrap();
    assert_eq!(doc["beta_source"], "trapping_region");
    assert_eq!(doc["must_die"]["definite"], serde_json::json!([2, 4]));
    // λ / ε^4 with λ = 210125/116 and ε = 1/2
    let beta = doc["beta"].as_f64().unwrap();
    assert!((beta - 16.0 * 210125.0 / 116.0).abs() < 1e-9 * beta);
    let classic = dieout(dir.path(), &["certify", "--config", &config("classic_lv.json"), "--from-trap"]);
    assert_eq!(code(&classic), 5);
}

#[test]
fn check_trophic_pass_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let o = dieout(dir.path(), &["check-trophic", "--config", &config("four_dim.json")]);
    assert_eq!(code(&o), 0);
    check_golden(&dir.path().join("trophic.json"), "four_dim_trophic.json");
    let o = dieout(dir.path(), &["check-trophic", "--config", &config("classic_lv.json")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("T1 [1]"));
}

#[test]
fn simulate_then_verify_scalar_decay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("decay.json");
    // x' = -x: x(t) = e^{-t}, and nu = (1) has nu . C = -1
    fs::write(
        &cfg,
        r#"{"d": 1, "dprime": 1, "C": ["-1"], "S": [["0"]], "signal": {"kind": "constant", "z": ["0"]},
            "x0": [1.0], "horizon": 5, "dt": 0.01, "sample_stride": 50}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&dieout(dir.path(), &["simulate", "--config", cfg])), 0);
    let traj = dir.path().join("trajectory.csv");
    let o = dieout(dir.path(), &["verify", "--config", cfg, "--traj", traj.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("dieout_report.json")).unwrap()).unwrap();
    assert_eq!(doc["min_census"], 1);
}

#[test]
fn verify_four_species_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("four_dim.json");
    assert_eq!(code(&dieout(dir.path(), &["simulate", "--config", &cfg])), 0);
    let traj = dir.path().join("trajectory.csv");
    let o = dieout(dir.path(), &["verify", "--config", &cfg, "--traj", traj.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("dieout_report.json")).unwrap()).unwrap();
    assert!(doc["min_census"].as_u64().unwrap() >= 2);
    // a bound below the run's maximum is inconsistent
    let o = dieout(dir.path(), &["verify", "--config", &cfg, "--traj", traj.to_str().unwrap(), "--beta", "100"]);
    assert_eq!(code(&o), 7);
}

#[test]
fn census_failure_exits_6() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("decay.json");
    fs::write(
        &cfg,
        r#"{"d": 1, "dprime": 1, "C": ["-1"], "S": [["0"]], "signal": {"kind": "constant", "z": ["0"]},
            "x0": [1.0], "horizon": 5, "dt": 0.01}"#,
    )
    .unwrap();
    // a trajectory that does not decay cannot satisfy the certificate
    let traj = dir.path().join("flat.csv");
    fs::write(&traj, "t,x1\n0,1\n1,1\n2,1\n").unwrap();
    let o = dieout(dir.path(), &["verify", "--config", cfg.to_str().unwrap(), "--traj", traj.to_str().unwrap()]);
    assert_eq!(code(&o), 6);
    assert!(stdout(&o).contains("first failing sample at t = 1"));
}

#[test]
fn blown_up_run_exits_9_and_fails_verification_with_7() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("growth.json");
    fs::write(
        &cfg,
        r#"{"d": 2, "dprime": 1, "C": ["1", "-1"], "S": [["0"], ["0"]], "signal": {"kind": "constant", "z": ["0"]},
            "x0": [1.0, 1.0], "horizon": 100, "dt": 0.1}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&dieout(dir.path(), &["simulate", "--config", cfg])), 9);
    let traj = dir.path().join("trajectory.csv");
    let o = dieout(dir.path(), &["verify", "--config", cfg, "--traj", traj.to_str().unwrap()]);
    assert_eq!(code(&o), 7);
}

#[test]
fn oscillator_event_log_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = dieout(dir.path(), &["simulate", "--config", &config("ex_specific_oscillator.json"), "--stride", "1000"]);
    assert_eq!(code(&o), 0);
    check_golden(&dir.path().join("events.csv"), "oscillator_events.csv");
    check_golden(&dir.path().join("trajectory.csv"), "oscillator_trajectory.csv");
}

#[test]
fn balanced_run_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = dieout(dir.path(), &["simulate", "--config", &config("ex_specific.json")]);
    assert_eq!(code(&o), 0);
    check_golden(&dir.path().join("trajectory.csv"), "ex_specific_trajectory.csv");
}

#[test]
fn halfplanes_vertices_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("ex_specific.json");
    let o = dieout(dir.path(), &["halfplanes", "--config", &cfg, "--grid", "10"]);
    assert_eq!(code(&o), 0);
    check_golden(&dir.path().join("vertices.json"), "ex_specific_vertices.json");
    check_golden(&dir.path().join("halfplanes.csv"), "ex_specific_halfplanes.csv");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("vertices.json")).unwrap()).unwrap();
    let triple = doc["vertices"].as_array().unwrap().iter().find(|v| v["z"] == serde_json::json!(["1/5", "2/5"]));
    assert!(triple.is_some());

    let o = dieout(dir.path(), &["halfplanes", "--config", &config("four_dim.json")]);
    assert_eq!(code(&o), 8);
}
