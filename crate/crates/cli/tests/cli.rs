use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn corral(args: &[&str], out: &Path) -> (bool, Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_corral"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    let text = std::fs::read_to_string(out.join("report.json")).unwrap();
    (status.status.success(), serde_json::from_str(&text).unwrap())
}

const TOP_LEVEL: [&str; 6] = ["protocol", "timings", "fidelity", "seeds", "versions", "error"];

fn assert_schema(report: &Value) {
    let keys: Vec<&String> = report.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), TOP_LEVEL.len(), "{keys:?}");
    for k in TOP_LEVEL {
        assert!(report.get(k).is_some(), "missing {k}");
    }
}

#[test]
fn corral_reports_the_revival() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{
  "initial": { "s": 10, "center": 0, "grid": { "step_divisor": 2 } },
  "stations": [ { "left": -101, "right": 101 } ],
  "output": { "heatmap_stride": 100, "report": "report.json" }
}"#,
    )
    .unwrap();
    let (ok, r) = corral(&["corral", "--plan", plan.to_str().unwrap()], dir.path());
    assert!(ok, "{r}");
    assert_schema(&r);
    assert_eq!(r["timings"]["t_m"], 574);
    assert_eq!(r["fidelity"]["n_states"], 10);
    assert!(r["fidelity"]["mean_fidelity"].as_f64().unwrap() > 0.999);
    assert!(r["error"].is_null());

    let csv = std::fs::read_to_string(dir.path().join("heatmap.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,j,P"));
    let mut sums = std::collections::BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        *sums.entry(f[0].parse::<usize>().unwrap()).or_insert(0.0) += f[2].parse::<f64>().unwrap();
    }
    assert_eq!(sums.keys().copied().collect::<Vec<_>>(), vec![0, 100, 200, 300, 400, 500]);
    for s in sums.values() {
        assert!((s - 1.0).abs() < 1e-9);
    }
    assert!(dir.path().join("run_info.json").exists());
}

#[test]
fn frames_cover_every_step() {
    let dir = tempfile::tempdir().unwrap();
    let (ok, r) = corral(&["frames", "--until", "995"], dir.path());
    assert!(ok, "{r}");
    assert_schema(&r);
    assert_eq!(r["fidelity"]["frames"], 996);
    let csv = std::fs::read_to_string(dir.path().join("frames.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("frame,j,P_up,P_down"));
    let mut frames: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    frames.dedup();
    assert_eq!(frames, (0..=995).collect::<Vec<_>>());
}

#[test]
fn reports_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["disorder-sweep", "--p-max", "0.002", "--p-step", "0.002", "--realizations", "3", "--seed", "9"];
    let (ok, r) = corral(&args, a.path());
    assert!(ok, "{r}");
    assert_schema(&r);
    assert_eq!(r["seeds"]["master_seed"], 9);
    assert_eq!(r["seeds"]["realizations"], 3);
    assert_eq!(r["fidelity"]["sweep"]["points"].as_array().unwrap().len(), 6);
    corral(&args, b.path());
    let ra = std::fs::read(a.path().join("report.json")).unwrap();
    let rb = std::fs::read(b.path().join("report.json")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn sigma_sweep_holds_for_wide_packets() {
    let dir = tempfile::tempdir().unwrap();
    let (ok, r) = corral(&["sigma-sweep"], dir.path());
    assert!(ok, "{r}");
    for p in r["fidelity"]["points"].as_array().unwrap() {
        if p["s"].as_f64().unwrap() >= 5.0 {
            assert!(p["fidelity"].as_f64().unwrap() >= 0.9, "{p}");
        }
    }
}

#[test]
fn oracle_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (ok, r) = corral(&["oracle-check"], dir.path());
    assert!(ok, "{r}");
    assert_schema(&r);
    assert_eq!(r["fidelity"]["passed"], true);
}

#[test]
fn bad_plan_exits_nonzero_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{ "initial": { "s": 10, "center": 0, "alpha": 0, "beta": 0 },
  "stations": [ { "left": -25, "right": 25 } ] }"#,
    )
    .unwrap();
    let (ok, r) = corral(&["corral", "--plan", plan.to_str().unwrap()], dir.path());
    assert!(!ok);
    assert_schema(&r);
    let err = r["error"].as_str().unwrap();
    assert!(err.contains("plan.json") && err.contains("stations"), "{err}");

    let (ok, r) = corral(&["herd", "--plan", "/no/such/plan.json"], dir.path());
    assert!(!ok);
    assert!(r["error"].as_str().unwrap().contains("/no/such/plan.json"));
}

#[test]
fn corral_rejects_multiple_stations() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{ "initial": { "s": 10, "center": 0, "alpha": 0, "beta": 0 },
  "stations": [ { "left": -50, "right": 50 }, { "left": 250, "right": 350 } ] }"#,
    )
    .unwrap();
    let (ok, r) = corral(&["corral", "--plan", plan.to_str().unwrap()], dir.path());
    assert!(!ok);
    assert!(r["protocol"].is_null());
}
