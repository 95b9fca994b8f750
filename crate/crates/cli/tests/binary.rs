use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn noregret(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noregret")).args(args).env_remove("NOREGRET_NUMERIC").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn docs(name: &str) -> String {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs")).join(name).display().to_string()
}

#[test]
fn samebid_prints_a_fraction() {
    let o = noregret(&["verify", "samebid", "--qS", "2/5", "--n", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "4/5");
}

#[test]
fn uniform_lp_on_the_appendix_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = noregret(&["lp", "uniform", "--dist", &docs("appD.json"), "--n", "2", "--format", "json", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["objective"], 0.28125);
    assert_eq!(v["total"], 0.5625);
    assert_eq!(v["exact"]["total"], "9/16");
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("solution.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn float_mode_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_noregret"))
        .args(["lp", "uniform", "--dist", &docs("appD.json"), "--format", "json"])
        .env("NOREGRET_NUMERIC", "float")
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["numeric"], "float");
    assert!((v["total"].as_f64().unwrap() - 0.5625).abs() < 1e-9);
    assert!(v.get("exact").is_none());
}

#[test]
fn verify_reports_are_exact_json() {
    for args in [
        vec!["verify", "counterexample", "--delta", "1/10", "--M", "10"],
        vec!["verify", "nonconvex"],
        vec!["verify", "uniform-subopt"],
    ] {
        let mut a = args.clone();
        a.extend(["--format", "json"]);
        let o = noregret(&a);
        assert!(o.status.success(), "{args:?}");
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["pass"], true);
        for c in v["checks"].as_array().unwrap() {
            assert!(c["left"].is_string() && c["right"].is_string());
        }
    }
    let table = stdout(&noregret(&["verify", "uniform-subopt"]));
    assert!(table.contains("37/64 > 9/16"), "{table}");
}

#[test]
fn errors_are_machine_readable() {
    let o = noregret(&["verify", "counterexample", "--delta", "1/5", "--M", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "core");
    let o = noregret(&["simulate", "--config", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(2));
}

fn write_config(dir: &Path, horizon: usize, trials: usize) -> String {
    let cfg = format!(
        r#"{{
            "dist": "{}",
            "n": 2, "horizon": {horizon},
            "auction": {{"type": "fse", "phases": 4}},
            "learners": {{"type": "mw", "learning_rate": 0.5}},
            "seed": 11, "trials": {trials}
        }}"#,
        docs("appD.json")
    );
    let path = dir.join("sim.json");
    std::fs::write(&path, cfg).unwrap();
    path.display().to_string()
}

#[test]
fn simulate_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 800, 2);
    let mut outputs = Vec::new();
    for (k, jobs) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        let o = noregret(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
        let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
        outputs.push((summary, trace));
    }
    assert_eq!(outputs[0], outputs[1]);
    let v: Value = serde_json::from_str(&outputs[0].0).unwrap();
    assert_eq!(v["format"], 1);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["rounds"], 1600);
    assert_eq!(v["trials"].as_array().unwrap().len(), 2);
    assert_eq!(v["config"]["horizon"], 800);
    assert_eq!(outputs[0].1.lines().count(), 1 + 1600);
    // The echoed config reproduces the run.
    let echo = dir.path().join("echo.json");
    std::fs::write(&echo, v["config"].to_string()).unwrap();
    let out = dir.path().join("again");
    assert!(noregret(&["simulate", "--config", echo.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read_to_string(out.join("summary.json")).unwrap(), outputs[0].0);
}

#[test]
fn zero_trials_give_an_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 800, 1);
    let out = dir.path().join("empty");
    let o = noregret(&["simulate", "--config", &cfg, "--trials", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["rounds"], 0);
    assert!(v["trials"].as_array().unwrap().is_empty());
}

#[test]
fn bad_horizon_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 900, 1);
    let o = noregret(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "schema");
    assert!(v["error"]["message"].as_str().unwrap().contains("multiple of 2P"));
}

#[test]
fn bench_and_bmsw_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 800, 1);
    let o = noregret(&["bench-learners", "--config", &cfg, "--kinds", "mw,ftl", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    let spa = dir.path().join("spa.json");
    std::fs::write(
        &spa,
        format!(
            r#"{{"dist": "{}", "n": 2, "horizon": 2000, "auction": {{"type": "spa_reserve", "reserve": 0, "epsilon": 0}}, "learners": {{"type": "truthful"}}}}"#,
            docs("appD.json")
        ),
    )
    .unwrap();
    let o = noregret(&["verify", "bmsw", "--config", spa.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}
