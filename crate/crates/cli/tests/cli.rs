use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn nonloc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nonloc"));
    c.env_remove("NONLOC_SEED");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cmd: &mut Command) -> (Output, Value) {
    let out = cmd.output().expect("binary runs");
    let value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, value)
}

fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn symbol_table_is_the_power_law() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report) = run(nonloc().args(["symbol", "--kernel", "fraclap", "--s", "0.5", "--L", "3", "--N", "256", "--out"]).arg(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report["library_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    let mut csv = csv::Reader::from_path(dir.path().join("symbol.csv")).unwrap();
    assert_eq!(csv.headers().unwrap().iter().collect::<Vec<_>>(), ["k", "xi", "ell"]);
    let mut rows = 0;
    for r in csv.records() {
        let r = r.unwrap();
        let k: f64 = r[0].parse().unwrap();
        let ell: f64 = r[2].parse().unwrap();
        let expected = PI * k / 3.0;
        assert!((ell - expected).abs() <= 1e-13 * expected.max(1.0), "k = {k}");
        rows += 1;
    }
    assert_eq!(rows, 129);
}

#[test]
fn counterexample_reverses_the_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report) = run(nonloc().arg("polya-szego").arg("--config").arg(config("counterexample.json")).arg("--out").arg(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report["result"]["inequality_holds"], false);
    assert!(report["result"]["seminorm_after"].as_f64() > report["result"]["seminorm_before"].as_f64());
    assert!(dir.path().join("polya-szego.json").exists());
    // the same through flags
    let (out, flags) = run(nonloc().args([
        "polya-szego",
        "--kernel",
        "counterexample_eps=0.3",
        "--N",
        "128",
        "--function",
        r#"{"kind": "two_bump", "a": 0.5, "b": 2.0, "half_width": 2}"#,
        "--out",
    ])
    .arg(dir.path()));
    assert!(out.status.success());
    assert_eq!(flags["config_hash"], report["config_hash"]);
    let fraclap = run(nonloc()
        .args(["polya-szego", "--kernel", "fraclap_s=0.5", "--N", "128", "--function"])
        .arg(r#"{"kind": "two_bump", "a": 0.5, "b": 2.0}"#)
        .arg("--out")
        .arg(dir.path()))
    .1;
    assert_eq!(fraclap["result"]["inequality_holds"], true);
}

#[test]
fn benjamin_ono_minimizers_are_symmetric_and_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (out, report) = run(nonloc().arg("minimize").arg("--config").arg(config("benjamin_ono.json")).args(["--jobs", "3", "--out"]).arg(a.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = report["result"]["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    for r in runs {
        assert_eq!(r["converged"], true);
        assert!(r["diagnostics"]["evenness_defect"].as_f64().unwrap() < 1e-6);
        assert!(r["diagnostics"]["monotonicity_defect"].as_f64().unwrap() < 1e-6);
        assert_eq!(r["diagnostics"]["critical_points"], 2);
        assert!((r["multiplier"].as_f64().unwrap() - 0.99725).abs() < 1e-4);
    }
    let profile = std::fs::read_to_string(a.path().join("minimize_profile.csv")).unwrap();
    assert!(profile.starts_with("run,x,u\n"));
    assert_eq!(profile.lines().count(), 1 + 4 * 512);

    // one worker instead of three: same bytes apart from the timestamp
    let (again, _) = run(nonloc().arg("minimize").arg("--config").arg(config("benjamin_ono.json")).args(["--jobs", "1", "--out"]).arg(b.path()));
    assert!(again.status.success());
    let first = std::fs::read_to_string(a.path().join("minimize.json")).unwrap();
    let second = std::fs::read_to_string(b.path().join("minimize.json")).unwrap();
    assert_eq!(without_timestamp(&first), without_timestamp(&second));
    for csv in ["minimize_profile.csv", "minimize_energy_trace.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(csv)).unwrap(),
            std::fs::read(b.path().join(csv)).unwrap()
        );
    }
}

#[test]
fn environment_seed_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["rearrange", "--function", r#"{"kind": "random"}"#, "--N", "32", "--seed", "1", "--out"];
    let (_, plain) = run(nonloc().args(args).arg(dir.path()));
    let (_, env1) = run(nonloc().env("NONLOC_SEED", "9").args(args).arg(dir.path()));
    let (_, env2) = run(nonloc().env("NONLOC_SEED", "9").args(args).arg(dir.path()));
    assert_eq!(plain["config"]["seed"], 1);
    assert_eq!(env1["config"]["seed"], 9);
    assert_ne!(plain["config_hash"], env1["config_hash"]);
    assert_eq!(env1["result"], env2["result"]);
    assert_ne!(plain["result"]["l2_before"], env1["result"]["l2_before"]);
    let (out, _) = run(nonloc().env("NONLOC_SEED", "nine").args(args).arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"command\": \"symbol\",").unwrap();
    let wrong = dir.path().join("wrong.json");
    std::fs::write(&wrong, r#"{"command": "symbol", "grid": {"L": 1.0, "N": 100}}"#).unwrap();
    let other = dir.path().join("other.json");
    std::fs::write(&other, r#"{"command": "riesz"}"#).unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["symbol".into(), "--config".into(), bad.display().to_string()],
        vec!["symbol".into(), "--config".into(), wrong.display().to_string()],
        vec!["symbol".into(), "--config".into(), other.display().to_string()],
        vec!["symbol".into(), "--kernel".into(), "gauss".into()],
        vec!["symbol".into(), "--kernel".into(), "fraclap_q=2".into()],
        vec!["symbol".into()],
        vec!["regularity".into(), "--s".into(), "0.3".into()],
        vec!["frobnicate".into()],
        vec!["minimize".into(), "--kernel".into(), "fraclap".into(), "--s".into(), "0.5".into()],
    ];
    for args in cases {
        let (out, _) = run(nonloc().args(&args).arg("--out").arg(dir.path()));
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let (out, _) = run(nonloc().args(["regularity", "--s", "0.3", "--beta", "0.5", "--out"]).arg(blocker.join("sub")));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unconverged_minimization_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = run(nonloc()
        .arg("minimize")
        .arg("--config")
        .arg(config("benjamin_ono.json"))
        .args(["--seeds", "1", "--max-iters", "2", "--out"])
        .arg(dir.path()));
    assert_eq!(out.status.code(), Some(3));
    // the report is still written
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("minimize.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["runs"][0]["converged"], false);
}

#[test]
fn constant_attractor_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report) = run(nonloc().arg("minimize").arg("--config").arg(config("double_well.json")).arg("--out").arg(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &report["result"]["runs"][0];
    assert_eq!(r["converged"], true);
    assert!(r["residual_norm"].as_f64().unwrap() < 1e-8);
    assert!(r["diagnostics"]["critical_points"].is_null());
    assert!((r["energy"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn regularity_and_circle_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (out, v) = run(nonloc().args(["regularity", "--s", "0.2", "--beta", "0.4", "--out"]).arg(dir.path()));
    assert!(out.status.success());
    assert_eq!(v["result"]["case"], "subcritical_i");
    assert!((v["result"]["guaranteed_family"]["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    let (_, w) = run(nonloc().args(["regularity", "--s", "0.3", "--beta", "0.5", "--out"]).arg(dir.path()));
    assert_eq!(w["result"]["case"], "supercritical_ii");

    let (out, d) = run(nonloc().args(["dtn-check", "--out"]).arg(dir.path()));
    assert!(out.status.success());
    for key in ["poisson", "principal_value", "wrapped_identity", "energy_identity"] {
        assert_eq!(d["result"][key]["pass"], true, "{key}");
    }
    let (out, _) = run(nonloc().args(["dtn-check", "--L", "2", "--out"]).arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kernel_classes_and_probes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, osc) = run(nonloc().args(["kernel-class", "--kernel", "oscillatory_convex", "--s", "0.5", "--out"]).arg(dir.path()));
    assert_eq!(osc["result"]["convex"], true);
    assert_eq!(osc["result"]["completely_monotone"]["consistent"], false);
    assert!(!osc["result"]["completely_monotone"]["sign_changes"].as_array().unwrap().is_empty());
    let (_, del) = run(nonloc().args(["kernel-class", "--kernel", "delaunay", "--out"]).arg(dir.path()));
    assert_eq!(del["result"]["completely_monotone"]["consistent"], true);

    let (out, p) = run(nonloc().args(["maxprinciple", "--kernel", "fraclap_s=0.5", "--m", "4", "--N", "128", "--out"]).arg(dir.path()));
    assert!(out.status.success());
    assert_eq!(p["result"]["all_positive"], true);
    assert_eq!(p["result"]["probes"].as_array().unwrap().len(), 3);
}

#[test]
fn csv_input_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = run(nonloc().args(["apply", "--kernel", "fraclap_s=0.5", "--N", "64", "--pv-probes", "3", "--out"]).arg(dir.path()));
    assert!(out.status.success());
    let table = dir.path().join("apply.csv");
    // apply's output has columns x,u,Lu; feed u back in and rearrange it
    let (out, r) = run(nonloc().args(["rearrange", "--N", "64", "--input"]).arg(&table).arg("--out").arg(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(r["result"]["equimeasurable"], true);
    let (out, e) = run(nonloc().args(["energy", "--kernel", "fraclap_s=0.5", "--N", "64", "--input"]).arg(&table).arg("--out").arg(dir.path()));
    assert!(out.status.success());
    // cos x at L = pi: [u]^2 = pi
    assert!((e["result"]["seminorm_sq_fourier"].as_f64().unwrap() - PI).abs() < 1e-12);
    let (out, _) = run(nonloc().args(["rearrange", "--N", "32", "--input"]).arg(&table).arg("--out").arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
}
