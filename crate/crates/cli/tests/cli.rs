use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn miplab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_miplab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("MIPLAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn shannon_canonical() -> f64 {
    // independent computation on [[.4,.1],[.1,.4]] with uniform marginals
    2.0 * 0.4 * (0.4f64 / 0.25).ln() + 2.0 * 0.1 * (0.1f64 / 0.25).ln()
}

#[test]
fn measure_kl_on_canonical_joint() {
    let dir = tempfile::tempdir().unwrap();
    let joint = data("canonical_joint.json");
    let out = miplab(dir.path(), &["measure", "--mi", "kl", "--joint", joint.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("measure.json"));
    let value = v["value"].as_f64().unwrap();
    assert!((value - shannon_canonical()).abs() < 1e-12);
    assert!((value - 0.1927448).abs() < 1e-7);
    assert_eq!(v["run_config"]["schema_version"], 1);
    assert_eq!(v["run_config"]["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn measure_tvd_and_conditional() {
    let dir = tempfile::tempdir().unwrap();
    let joint = data("canonical_joint.json");
    miplab(dir.path(), &["measure", "--mi", "tvd", "--joint", joint.to_str().unwrap()]);
    let tvd = json(&dir.path().join("measure.json"))["value"].as_f64().unwrap();
    assert!((tvd - 0.6).abs() < 1e-12);

    // one slice carries half the mass of the canonical joint, the other is independent
    let tensor = data("conditional_tensor.json");
    let out = miplab(dir.path(), &["measure", "--mi", "kl", "--joint", tensor.to_str().unwrap(), "--conditional"]);
    assert_eq!(out.status.code(), Some(0));
    let cmi = json(&dir.path().join("measure.json"))["value"].as_f64().unwrap();
    assert!((cmi - 0.5 * shannon_canonical()).abs() < 1e-12);
}

#[test]
fn rank_mismatch_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let joint = data("canonical_joint.json");
    let out = miplab(dir.path(), &["measure", "--mi", "kl", "--joint", joint.to_str().unwrap(), "--conditional"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_reports_position_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let joint = data("malformed_joint.json");
    let out = miplab(dir.path(), &["measure", "--mi", "kl", "--joint", joint.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
    assert!(!dir.path().join("measure.json").exists());
}

#[test]
fn unknown_measure_and_missing_file_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let joint = data("canonical_joint.json");
    assert_eq!(
        miplab(dir.path(), &["measure", "--mi", "renyi", "--joint", joint.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(miplab(dir.path(), &["measure", "--mi", "kl", "--joint", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn fmi_exact_pays_tvd_information() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = data("canonical_scenario.json");
    let out =
        miplab(dir.path(), &["mechanism", "--mechanism", "fmi", "--scenario", scenario.to_str().unwrap(), "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("payments.json"));
    let agents = v["report"]["agents"].as_array().unwrap();
    assert_eq!(agents.len(), 2);
    for a in agents {
        assert!((a["payment"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    }
    assert_eq!(v["run_config"]["mechanism"], "fmi");
}

#[test]
fn csv_output_has_header_and_meta_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = data("canonical_scenario.json");
    let out = miplab(
        dir.path(),
        &["mechanism", "--mechanism", "md", "--scenario", scenario.to_str().unwrap(), "--exact", "--format", "csv"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("payments.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("agent,payment,information_score,prediction_score,effort_cost,utility"));
    for line in lines {
        let payment: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        // Σ_σ Q(σ,σ) − Σ_σ Q_1(σ) Q_2(σ) = 0.8 − 0.5
        assert!((payment - 0.3).abs() < 1e-12);
    }
    let meta = json(&dir.path().join("payments.csv.meta.json"));
    assert_eq!(meta["run_config"]["mechanism"], "md");
}

#[test]
fn sampled_mechanisms_run() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = data("canonical_scenario.json");
    let s = scenario.to_str().unwrap();
    for mech in ["fmi", "bmi", "md", "ca", "sppm"] {
        let mut args = vec!["mechanism", "--mechanism", mech, "--scenario", s, "--seed", "3"];
        if mech != "sppm" {
            args.extend(["--questions", "500"]);
        }
        let out = miplab(dir.path(), &args);
        assert_eq!(out.status.code(), Some(0), "{mech}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bts_exact_on_two_state_world() {
    let dir = tempfile::tempdir().unwrap();
    let world = data("two_state_world.json");
    let out = miplab(
        dir.path(),
        &["mechanism", "--mechanism", "bts", "--scenario", world.to_str().unwrap(), "--exact", "--alpha", "1"],
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("payments.json"));
    for a in v["report"]["agents"].as_array().unwrap() {
        assert!((a["information_score"].as_f64().unwrap() - 0.1264670).abs() < 1e-6);
    }
}

#[test]
fn bts_without_profile_or_exact_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let world = data("two_state_world.json");
    let out = miplab(dir.path(), &["mechanism", "--mechanism", "bts", "--scenario", world.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_bts_profile_writes_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let profile = data("degenerate_bts.json");
    let out = miplab(dir.path(), &["mechanism", "--mechanism", "bts", "--bts-profile", profile.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&dir.path().join("payments.error.json"));
    assert_eq!(v["error"]["kind"], "zero_frequency");
    assert_eq!(v["error"]["agent"], 3);
    assert_eq!(v["error"]["signal"], 1);

    let smoothed = miplab(
        dir.path(),
        &["mechanism", "--mechanism", "bts", "--bts-profile", profile.to_str().unwrap(), "--smoothing", "0.5"],
    );
    assert_eq!(smoothed.status.code(), Some(0));
    let warnings = json(&dir.path().join("payments.json"))["report"]["warnings"].clone();
    assert!(!warnings.as_array().unwrap().is_empty());
}

#[test]
fn md_rejects_non_binary_alphabet() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ternary.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1,
            "prior": {"mode": "pairwise", "joint": [[0.2,0.05,0.05],[0.05,0.25,0.05],[0.05,0.05,0.25]], "symmetric": true},
            "strategies": [
              {"label": "truthful", "kind": "channel", "matrix": [[1,0,0],[0,1,0],[0,0,1]]},
              {"label": "truthful", "kind": "channel", "matrix": [[1,0,0],[0,1,0],[0,0,1]]}]}"#,
    )
    .unwrap();
    let out = miplab(dir.path(), &["mechanism", "--mechanism", "md", "--scenario", path.to_str().unwrap(), "--exact"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&dir.path().join("payments.error.json"))["error"]["kind"], "non_binary_alphabet");
}

#[test]
fn unsupported_schema_version_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("joint.json");
    std::fs::write(&path, r#"{"schema_version": 7, "joint": [[0.5, 0.0], [0.0, 0.5]]}"#).unwrap();
    let out = miplab(dir.path(), &["measure", "--mi", "kl", "--joint", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(miplab(dir.path(), &["verify", "nosuch"]).status.code(), Some(2));
    assert_eq!(miplab(dir.path(), &["verify", "dpi", "--instances", "0"]).status.code(), Some(2));
}

#[test]
fn verify_writes_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = miplab(dir.path(), &["verify", "dpi", "--instances", "200", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("verdict-dpi.json"));
    assert_eq!(v["suite"], "dpi");
    assert_eq!(v["pass"], true);
    assert_eq!(v["violation_count"], 0);
    assert_eq!(v["run_config"]["seed"], 5);
}

#[test]
fn identical_configuration_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["verify", "scenario-equivalence", "--instances", "10", "--seed", "11"];
    miplab(a.path(), &args);
    let mut with_jobs = vec!["--jobs", "2"];
    with_jobs.extend(args);
    miplab(b.path(), &with_jobs);
    let name = "verdict-scenario-equivalence.json";
    assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());

    let scenario = data("canonical_scenario.json");
    let run = [
        "mechanism",
        "--mechanism",
        "fmi",
        "--scenario",
        scenario.to_str().unwrap(),
        "--questions",
        "300",
        "--seed",
        "4",
        "--pairing",
        "random-reference",
    ];
    miplab(a.path(), &run);
    miplab(b.path(), &run);
    assert_eq!(
        std::fs::read(a.path().join("payments.json")).unwrap(),
        std::fs::read(b.path().join("payments.json")).unwrap()
    );
}

#[test]
fn empty_sweep_grid_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = miplab(dir.path(), &["sweep", "--kind", "fmi-t", "--grid", ""]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("sweep-fmi-t.csv")).unwrap();
    assert_eq!(text, "grid_point,seed,metric,value\n");
}

#[test]
fn sweep_is_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = miplab(dir.path(), &["sweep", "--kind", "bts-n", "--grid", "10,20", "--seeds", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("sweep-bts-n.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
    assert_eq!(miplab(dir.path(), &["sweep", "--kind", "bts-n", "--grid", "10,x"]).status.code(), Some(2));
}

#[test]
fn output_directory_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let joint = data("canonical_joint.json");
    let out = Command::new(env!("CARGO_BIN_EXE_miplab"))
        .args(["measure", "--mi", "chi2", "--joint", joint.to_str().unwrap()])
        .env("MIPLAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("measure.json").exists());
}
