use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("kk runs")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.json"))
        .to_string_lossy()
        .into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn small_riemann(dir: &Path) -> PathBuf {
    let p = dir.join("small.json");
    std::fs::write(
        &p,
        r#"{
  "schema": 1,
  "name": "small",
  "model": {"name": "gc", "B": 1.0, "alpha": 0.5, "source": {"kind": "exit", "k": 0.1}},
  "initial": {
    "rho": {"kind": "riemann", "left": 1.0, "right": 0.5, "x0": 0.5},
    "w": {"kind": "riemann", "left": 1.5, "right": 1.0, "x0": 0.5}
  },
  "grid": {"x_left": 0.0, "x_right": 1.0, "n_cells": 128, "boundary": "outflow"},
  "t_end": 0.1,
  "record_every": 0.05,
  "epsilon": [0.01, 0.005],
  "region": {"C1": -0.6, "C2": 1.7}
}
"#,
    )
    .unwrap();
    p
}

#[test]
fn audit_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = kk(&["audit", &scenario("damping"), "--out", "a"], tmp.path());
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("a/audit.json")).unwrap()).unwrap();
    let first = &report["conditions"][0];
    for key in ["condition", "verdict", "witness", "residual"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }

    let bad = kk(&["audit", &scenario("remark_source"), "--out", "b"], tmp.path());
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("witness"));
}

#[test]
fn parse_and_missing_input() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("broken.json"), "{\n  \"schema\": 1,\n  \"name\": \n").unwrap();
    let o = kk(&["audit", "broken.json"], tmp.path());
    assert_eq!(code(&o), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let o = kk(&["solve", "nowhere.json"], tmp.path());
    assert_eq!(code(&o), 66);

    // two identical epsilon entries are rejected when parsing
    let text = std::fs::read_to_string(small_riemann(tmp.path())).unwrap().replace("[0.01, 0.005]", "[0.01, 0.01]");
    std::fs::write(tmp.path().join("dup.json"), text).unwrap();
    assert_eq!(code(&kk(&["sweep", "dup.json"], tmp.path())), 64);
}

#[test]
fn solve_writes_trajectory_and_plot_reads_it() {
    let tmp = tempfile::tempdir().unwrap();
    small_riemann(tmp.path());
    let o = kk(&["solve", "small.json", "--epsilon", "0.01", "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("region=inside"), "{stdout}");
    let index: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run/trajectory.json")).unwrap()).unwrap();
    assert_eq!(index["t_values"].as_array().unwrap().len(), 3);
    assert_eq!(index["epsilon"], 0.01);
    let csv = std::fs::read_to_string(tmp.path().join("run/trajectory_0000.csv")).unwrap();
    assert!(csv.starts_with("x,rho,m,w\n"));
    assert_eq!(csv.lines().count(), 129);

    let p = kk(&["plot", "run/trajectory.json", "--out", "plots"], tmp.path());
    assert_eq!(code(&p), 0, "{}", String::from_utf8_lossy(&p.stderr));
    let svg = std::fs::read_to_string(tmp.path().join("plots/plot_0002.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="curve""#).count(), 4);

    std::fs::remove_file(tmp.path().join("run/trajectory_0001.csv")).unwrap();
    assert_eq!(code(&kk(&["plot", "run/trajectory.json"], tmp.path())), 66);
}

#[test]
fn inviscid_index_has_zero_epsilon() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kk(&["solve", &scenario("damping"), "--out", "d"], tmp.path());
    assert_eq!(code(&o), 0);
    let index: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("d/trajectory.json")).unwrap()).unwrap();
    assert_eq!(index["epsilon"], 0.0);
}

#[test]
fn empty_index_is_missing_input() {
    let tmp = tempfile::tempdir().unwrap();
    small_riemann(tmp.path());
    assert_eq!(code(&kk(&["solve", "small.json", "--inviscid", "--out", "run"], tmp.path())), 0);
    let path = tmp.path().join("run/trajectory.json");
    let mut index: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    index["t_values"] = serde_json::json!([]);
    index["files"] = serde_json::json!([]);
    std::fs::write(&path, index.to_string()).unwrap();
    assert_eq!(code(&kk(&["plot", "run/trajectory.json"], tmp.path())), 66);
}

#[test]
fn blowup_and_region_violation() {
    let tmp = tempfile::tempdir().unwrap();
    // vacuum data without the +epsilon lift
    assert_eq!(code(&kk(&["solve", &scenario("vacuum_transport"), "--inviscid", "--out", "v"], tmp.path())), 3);

    let text = std::fs::read_to_string(small_riemann(tmp.path())).unwrap().replace("\"C2\": 1.7", "\"C2\": 1.2");
    std::fs::write(tmp.path().join("tight.json"), text).unwrap();
    let o = kk(&["solve", "tight.json", "--out", "t"], tmp.path());
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn solve_requires_audit_unless_forced() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&kk(&["solve", &scenario("remark_source"), "--out", "r"], tmp.path())), 2);
    assert_eq!(code(&kk(&["solve", &scenario("remark_source"), "--force", "--out", "r"], tmp.path())), 0);
}

#[test]
fn sweep_bundle_with_reduction() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(small_riemann(tmp.path()))
        .unwrap()
        .replace(r#""w": {"kind": "riemann", "left": 1.5, "right": 1.0, "x0": 0.5}"#, r#""w": {"kind": "constant", "value": 1.5}"#);
    std::fs::write(tmp.path().join("wconst.json"), text).unwrap();
    let o = kk(&["sweep", "wconst.json", "--out", "s"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let decay = std::fs::read_to_string(tmp.path().join("s/decay.csv")).unwrap();
    assert!(decay.starts_with("epsilon,functional,value\n"));
    assert_eq!(decay.matches(",reduction_gap,").count(), 2);
    let measure = std::fs::read_to_string(tmp.path().join("s/measure_00.csv")).unwrap();
    assert!(measure.starts_with("rho_center,w_center,weight\n"));
    for svg in ["gap.svg", "dissipation.svg", "tartar.svg"] {
        assert!(tmp.path().join("s").join(svg).exists());
    }
}
