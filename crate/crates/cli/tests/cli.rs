use std::process::{Command, Output};

use serde_json::Value;

fn clusterkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clusterkit"))
        .args(args)
        .env_remove("CLUSTERKIT_CONFIG")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = clusterkit(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn enumerate_examples() {
    let v = json(&["enumerate", "--n", "5", "--class", "two_connected"]);
    assert_eq!(v["schema"], "clusterkit/v1");
    assert_eq!(v["count"], 238);
    assert_eq!(
        json(&[
            "enumerate",
            "--n",
            "3",
            "--class",
            "D",
            "--white",
            "1,2",
            "--black",
            "3"
        ])["count"],
        2
    );
    assert_eq!(json(&["enumerate", "--n", "1", "--class", "all"])["count"], 1);
    assert_eq!(
        json(&["enumerate", "--n", "8", "--class", "connected"])["count"],
        251_548_592u64
    );
}

#[test]
fn weighted_enumeration_sums_to_known_value() {
    // Rods at 0 and 0.5 overlap, everything else is apart: the sum over all graphs is ∏(1+f) = 0.
    let v = json(&["enumerate", "--n", "3", "--points", "0,0.5,3"]);
    assert_eq!(v["count"], 8);
    assert_eq!(v["weight_sum"].as_f64(), Some(0.0));
    assert_eq!(v["graphs"].as_array().unwrap().len(), 8);
}

#[test]
fn verify_lemma21_passes() {
    let out = clusterkit(&["verify", "lemma21", "--max-n", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn failing_verify_exits_one_with_witness() {
    let out = clusterkit(&["verify", "prop31", "--max-n", "6", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert!(v["witness"].as_str().unwrap().contains("f01="));
}

#[test]
fn usage_and_bound_errors_exit_two() {
    assert_eq!(clusterkit(&["enumerate", "--n", "10"]).status.code(), Some(2));
    assert_eq!(
        clusterkit(&["enumerate", "--n", "8", "--class", "C", "--white", "1", "--black", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        clusterkit(&["enumerate", "--n", "3", "--class", "D", "--white", "1", "--black", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(clusterkit(&["radius", "lp", "--C", "-1"]).status.code(), Some(2));
    assert_eq!(clusterkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(clusterkit(&["--threads", "0", "radius", "lp"]).status.code(), Some(2));
}

#[test]
fn csv_output_has_version_line() {
    let out = clusterkit(&["--format", "csv", "radius", "groeneveld"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# clusterkit v1 radius"));
    assert!(lines.next().unwrap().starts_with("criterion,C,u,radius"));
    assert!(lines.next().unwrap().starts_with("groeneveld,1.0000000000000000e+0,"));
}

#[test]
fn config_precedence() {
    let dir = std::env::temp_dir().join(format!("clusterkit-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let conf = dir.join("run.conf");
    std::fs::write(&conf, "# defaults\nC = 2\nu = 1\n").unwrap();
    let conf = conf.to_str().unwrap();
    let radius = |v: &Value| v["C"].as_f64().unwrap();

    assert_eq!(radius(&json(&["--config", conf, "radius", "lp"])), 2.0);
    assert_eq!(radius(&json(&["--config", conf, "radius", "lp", "--C", "3"])), 3.0);

    let out = Command::new(env!("CARGO_BIN_EXE_clusterkit"))
        .args(["--config", conf, "radius", "lp"])
        .env("CLUSTERKIT_C", "4")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(radius(&v), 4.0);

    let out = Command::new(env!("CARGO_BIN_EXE_clusterkit"))
        .args(["radius", "lp"])
        .env("CLUSTERKIT_CONFIG", conf)
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(radius(&v), 2.0);

    std::fs::write(dir.join("bad.conf"), "no equals sign\n").unwrap();
    let bad = dir.join("bad.conf");
    assert_eq!(
        clusterkit(&["--config", bad.to_str().unwrap(), "radius", "lp"])
            .status
            .code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("clusterkit-out-{}.json", std::process::id()));
    let out = clusterkit(&[
        "--output",
        path.to_str().unwrap(),
        "enumerate",
        "--n",
        "4",
        "--class",
        "connected",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["count"], 38);
    std::fs::remove_file(&path).ok();
}

#[test]
fn series_reports_tonks_first_coefficients() {
    let v = json(&["series", "ursell", "--order", "1"]);
    let rows = v["coefficients"].as_array().unwrap();
    assert_eq!(rows[1]["value"].as_f64(), Some(-2.0));
    let v = json(&["series", "gbar", "--points", "0,0.5"]);
    assert!(v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["value"].as_f64() == Some(0.0)));
}
