use std::path::Path;
use std::process::{Command, Output};

fn qtd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtd"))
        .args(args)
        .env("QTD_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn phi_outside_range_is_a_usage_error() {
    let o = qtd(&["dilation", "--theta", "0.7854", "--phi", "3.1416", "--u1", "0.02", "--u2", "0.02", "--delta", "0.01"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("phi"));
}

#[test]
fn zero_norm_state_is_a_usage_error() {
    let o = qtd(&["dilation", "--theta", "pi/4", "--phi", "pi", "--u1", "0.02", "--u2", "0.02", "--delta", "0.01"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("zero-norm"));
}

#[test]
fn theta_zero_has_no_quantum_terms() {
    let o = qtd(&["dilation", "--theta", "0", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["gamma_q_inv"].as_f64(), Some(0.0));
    assert_eq!(v["report"]["delta_q"].as_f64(), Some(0.0));
}

#[test]
fn dilation_matches_library() {
    let o = qtd(&["dilation", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let spec = qtd_core::PacketPairSpec::new(std::f64::consts::FRAC_PI_4, 0.0, 0.02, 0.03, 0.01).unwrap();
    let r = qtd_core::dilation_report(&spec).unwrap();
    assert_eq!(v["report"]["gamma_q_inv"].as_f64(), Some(r.gamma_q_inv));
    assert_eq!(v["report"]["gamma_c_inv_second_moment"].as_f64(), Some(r.gamma_c_inv_second_moment));
}

#[test]
fn unknown_scenario_lists_names() {
    let o = qtd(&["scenario", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig2d"));
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"theta": 0.3, "colour": 1}"#).unwrap();
    let o = qtd(&["dilation", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flag_beats_file_beats_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"theta": 0.3, "delta": 0.02, "grid": 8}"#).unwrap();
    let out = dir.path().join("out");
    let o = qtd(&[
        "scenario", "fig1a", "--config", cfg.to_str().unwrap(), "--theta", "0.4", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("fig1a.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["packets"]["theta"], 0.4);
    assert_eq!(side["config"]["packets"]["delta"], 0.02);
    assert_eq!(side["config"]["packets"]["u1"], 0.02);
    assert_eq!(side["config"]["grid"], 8);
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn fig2d_writes_spectrum_sidecar_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = qtd(&["scenario", "fig2d", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut files: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, ["fig2d.csv", "fig2d.json", "fig2d_summary.json"]);
    let csv = String::from_utf8(read(dir.path(), "fig2d.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("omega_over_Omega,p_sup,p_cl,abs_diff,rel_diff"));
    assert_eq!(csv.lines().count(), 2049);
}

#[test]
fn fig1b_reports_ridge_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let o = qtd(&["scenario", "fig1b", "--out", dir.path().to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let got = v["summary"]["ridge_endpoint"]["separation_over_delta"].as_f64().unwrap();
    assert!((got - 2.261).abs() < 1e-3, "{got}");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = qtd(&["scenario", "deltaq-c", "--grid", "16", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["deltaq-c.csv", "deltaq-c_ridge.csv", "deltaq-c.json", "deltaq-c_summary.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn selftest_passes_and_reports_json() {
    let o = qtd(&["selftest", "--cases", "20", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn perturbed_selftest_names_failures() {
    let o = qtd(&["selftest", "--cases", "20", "--perturb", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("angular/xi1_integrates_to_zero"));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_qtd"))
        .args(["dilation"])
        .env("QTD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
