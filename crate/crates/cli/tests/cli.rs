use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_gevrey-bbm");
const DEFAULT_CONF: &str = include_str!("../configs/default.conf");

fn workspace(extra: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, format!("{DEFAULT_CONF}\n{extra}")).unwrap();
    (dir, conf)
}

fn run(cmd: &str, conf: &Path, overrides: &[&str]) -> Output {
    Command::new(BIN)
        .arg(cmd)
        .arg("--config")
        .arg(conf)
        .args(overrides)
        .env("NO_COLOR", "1")
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_schema(name: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let schema = read_json(&path);
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_writes_csv_and_report() {
    let (dir, conf) = workspace("");
    let out = run(
        "simulate",
        &conf,
        &["--t_end", "0.5", "--sample_every", "50"],
    );
    ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("out/simulate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,l2,h1,energy,h1_invariant,sigma_est"));
    assert_eq!(lines.count(), 11);
    let doc = read_json(&dir.path().join("out/simulate.json"));
    assert_schema("simulate", &doc);
    assert!(doc["result"]["h1_invariant_drift"].as_f64().unwrap() < 1e-10);
    assert_eq!(doc["config"]["model"]["t_end"], "0.5");
}

#[test]
fn zero_horizon_gives_single_row() {
    let (dir, conf) = workspace("");
    ok(&run("simulate", &conf, &["--t_end=0"]));
    let csv = std::fs::read_to_string(dir.path().join("out/simulate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn missing_config_exits_with_config_code() {
    let out = Command::new(BIN)
        .args(["simulate", "--config", "/definitely/not/here.conf"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));
}

#[test]
fn unknown_and_malformed_keys_are_rejected() {
    let (_dir, conf) = workspace("");
    assert_eq!(
        run("simulate", &conf, &["--nonsense", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run("simulate", &conf, &["--dt", "fast"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run("simulate", &conf, &["--n_points", "101"]).status.code(),
        Some(2)
    );
}

#[test]
fn failed_fit_writes_error_report() {
    let (dir, conf) = workspace("");
    let out = run("radius", &conf, &["--t_end", "0.1", "--sample_every", "50"]);
    assert_eq!(out.status.code(), Some(5));
    let doc = read_json(&dir.path().join("out/radius.error.json"));
    assert_schema("error", &doc);
    assert_eq!(doc["error"]["kind"], "data");
}

#[test]
fn identities_report_labels_and_exponents() {
    let (dir, conf) = workspace("");
    ok(&run(
        "verify-identities",
        &conf,
        &["--k_max", "8", "--fab_samples", "500"],
    ));
    let doc = read_json(&dir.path().join("out/verify-identities.json"));
    assert_schema("verify-identities", &doc);
    let r = &doc["result"];
    assert_eq!(r["factorization"]["all_equal"], true);
    let labels: Vec<&str> = r["factorization"]["special_cases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, ["3·ξ₁ξ₂ξ₃", "−5·ξ₁ξ₂ξ₃·e₂"]);
    assert!((r["exponents"]["beta"].as_f64().unwrap() - 1.5).abs() < 1e-15);
    assert!(r["fab_spread"].as_f64().unwrap() < 3.0);
}

#[test]
fn conservation_report_matches_schema() {
    let (dir, conf) = workspace("");
    ok(&run(
        "conservation",
        &conf,
        &["--n_points", "128", "--dt", "0.005"],
    ));
    let doc = read_json(&dir.path().join("out/conservation.json"));
    assert_schema("conservation", &doc);
    let r = &doc["result"];
    assert_eq!(r["entries"].as_array().unwrap().len(), 8);
    assert!(r["scaling"]["slope"].as_f64().unwrap() > 1.4);
    let csv = std::fs::read_to_string(dir.path().join("out/conservation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn linear_flow_radius_does_not_shrink() {
    let (dir, conf) = workspace("");
    let out = run(
        "radius",
        &conf,
        &[
            "--linear_only",
            "true",
            "--initial",
            "sech2",
            "--amplitude",
            "1",
            "--width",
            "1",
            "--n_points",
            "512",
            "--dt",
            "0.01",
            "--t_end",
            "20",
            "--sample_every",
            "100",
        ],
    );
    ok(&out);
    let doc = read_json(&dir.path().join("out/radius.json"));
    assert_schema("radius", &doc);
    assert!(
        doc["result"]["mu_fit"].as_f64().unwrap().abs() < 0.05,
        "{}",
        doc["result"]["mu_fit"]
    );
    assert_eq!(doc["result"]["all_bounds_hold"], true);
}

#[test]
fn schedule_staircase_follows_power_law() {
    let (dir, conf) = workspace("");
    ok(&run("schedule", &conf, &[]));
    let doc = read_json(&dir.path().join("out/schedule.json"));
    assert_schema("schedule", &doc);
    let r = &doc["result"];
    let sigmas: Vec<f64> = r["staircase"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["sigma_assigned"].as_f64().unwrap())
        .collect();
    assert!(sigmas.windows(2).all(|w| w[1] <= w[0]));
    let slope = r["staircase_exponent"].as_f64().unwrap();
    assert!(
        (slope + r["inverse_beta"].as_f64().unwrap()).abs() < 0.01,
        "{slope}"
    );
    assert_eq!(r["schedule"]["all_ok"], true);
}

#[test]
fn calibrate_writes_loadable_file() {
    let (dir, conf) = workspace("");
    ok(&run(
        "calibrate",
        &conf,
        &[
            "--n_points",
            "64",
            "--bilinear_samples",
            "100",
            "--dt",
            "0.01",
        ],
    ));
    let doc = read_json(&dir.path().join("out/calibrate.json"));
    assert_schema("calibrate", &doc);
    ok(&run(
        "conservation",
        &conf,
        &[
            "--n_points",
            "64",
            "--dt",
            "0.01",
            "--calibration",
            "calibration.cal",
            "--sigma_list",
            "0.1",
        ],
    ));
    let cons = read_json(&dir.path().join("out/conservation.json"));
    assert_eq!(cons["result"]["c2"], doc["result"]["c2"]);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let (dir, conf) = workspace("");
    let args = ["--n_points", "128", "--dt", "0.005"];
    let mut texts = Vec::new();
    for jobs in ["1", "4"] {
        let mut a = args.to_vec();
        a.extend(["--jobs", jobs]);
        ok(&run("sweep", &conf, &a));
        let doc = read_json(&dir.path().join("out/sweep.json"));
        assert_schema("sweep", &doc);
        texts.push(doc["result"]["tasks"].to_string());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn conservation_at_sigma_zero_stays_below_floor() {
    let (dir, conf) = workspace("");
    ok(&run(
        "conservation",
        &conf,
        &["--sigma_list", "0", "--n_points", "128", "--dt", "0.005"],
    ));
    let doc = read_json(&dir.path().join("out/conservation.json"));
    assert_schema("conservation", &doc);
    let r = &doc["result"]["entries"][0]["report"];
    let floor = 1e-11 * r["energy0"].as_f64().unwrap();
    assert!(r["defect"].as_f64().unwrap() < floor, "{}", r["defect"]);
    assert!(doc["result"]["scaling"].is_null());
}

#[test]
fn schedule_with_unit_constants_matches_formula() {
    let (dir, conf) = workspace("");
    ok(&run("schedule", &conf, &["--c1", "1", "--c2", "1"]));
    let doc = read_json(&dir.path().join("out/schedule.json"));
    let beta = 1.5;
    for p in doc["result"]["staircase"].as_array().unwrap() {
        let n = p["n_steps"].as_f64().unwrap();
        let expected = f64::min(0.3, (2.0 / (n + 1.0)).powf(1.0 / beta));
        let got = p["sigma_assigned"].as_f64().unwrap();
        assert!(
            (got - expected).abs() <= 1e-15 * expected,
            "n = {n}: {got} vs {expected}"
        );
    }
}
