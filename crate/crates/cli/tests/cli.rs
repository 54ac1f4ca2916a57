use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_popchaos"))
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const INNOVATIVE: &str = r#"{"game":{"p":0.2},"protocol":{"kind":"innovative_constructed","beta2":2,"beta3":-0.3333333333333333},"delta":1}"#;
const PERTURBED_LOW: &str = r#"{"game":{"p":0.4},"protocol":{"kind":"perturbed_ppi"},"delta":0.5}"#;
const TRUNCATED: &str =
    r#"{"game":{"p":0.25},"protocol":{"kind":"truncated_ppi","gamma":0.28125},"delta":1}"#;

#[test]
fn innovative_certificate_and_repelling() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "inn.json", INNOVATIVE);
    let o = run(&["certify"], Some(&cfg));
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["certificate"].is_object());
    assert_eq!(v["certificate"]["period3"].as_array().unwrap().len(), 3);
    assert_eq!(v["equilibrium_stability"]["classification"], "repelling");
    let l = v["equilibrium_stability"]["left_derivative"]
        .as_f64()
        .unwrap();
    let r = v["equilibrium_stability"]["right_derivative"]
        .as_f64()
        .unwrap();
    assert!((l + 4.0).abs() < 1e-9 && (r + 4.0).abs() < 1e-9);
}

#[test]
fn perturbed_below_threshold_has_no_certificate() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "p.json", PERTURBED_LOW);
    let o = run(&["certify"], Some(&cfg));
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["certificate"].is_null());
}

#[test]
fn truncated_certificate_and_repelling() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "t.json", TRUNCATED);
    let o = run(&["certify"], Some(&cfg));
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["equilibrium_stability"]["classification"], "repelling");
}

#[test]
fn explicit_probes_override_defaults() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "p.json",
        r#"{"game":{"p":0.4},"protocol":{"kind":"perturbed_ppi"},"delta":1}"#,
    );
    let o = run(&["certify", "--probes", "0.2", "0.7"], Some(&cfg));
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["certify", "--probes", "0.7", "0.2"], Some(&cfg));
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn invalid_configs_exit_4() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(&dir, "u.json", r#"{"gmae":{}}"#);
    assert_eq!(run(&["certify"], Some(&unknown)).status.code(), Some(4));
    let bad_game = write_config(
        &dir,
        "g.json",
        r#"{"game":{"a":2,"b":1,"c":1,"d":0},"protocol":{"kind":"ppi"},"delta":0.5}"#,
    );
    assert_eq!(run(&["certify"], Some(&bad_game)).status.code(), Some(4));
    let missing = dir.path().join("absent.json");
    assert_eq!(run(&["simulate"], Some(&missing)).status.code(), Some(4));
    let o = run(&["thresholds", "--p", "0.5"], None);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn range_failure_exits_5() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "r.json",
        r#"{"game":{"p":0.4},"protocol":{"kind":"perturbed_ppi","eta":50},"delta":1}"#,
    );
    assert_eq!(run(&["certify"], Some(&cfg)).status.code(), Some(5));
    let pl = write_config(
        &dir,
        "pl.json",
        r#"{"pl_map":{"nodes":[[0,0],[0.2,1.2],[1,1]]}}"#,
    );
    assert_eq!(run(&["periods"], Some(&pl)).status.code(), Some(5));
}

#[test]
fn thresholds_reflect_above_one_half() {
    let o = run(&["thresholds", "--p", "0.4,0.6,0.25"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let row = |i: usize| lines[i].split(',').collect::<Vec<_>>();
    let (r4, r6, r25) = (row(1), row(2), row(3));
    assert_eq!(r4[col("reflected")], "false");
    assert_eq!(r6[col("reflected")], "true");
    assert_eq!(r4[col("p_effective")], r6[col("p_effective")]);
    assert_eq!(r4[col("delta1")..], r6[col("delta1")..]);
    let dp: f64 = r4[col("delta_p")].parse().unwrap();
    assert!((dp - 0.948808).abs() < 1e-5);
    let ds4: f64 = r25[col("delta_star4")].parse().unwrap();
    assert!((ds4 - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn thresholds_json_from_config_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.json", r#"{"p_grid":[0.3,0.45]}"#);
    let o = run(&["thresholds", "--format", "json"], Some(&cfg));
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn simulate_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "inn.json", INNOVATIVE);
    let o = run(&["simulate", "--x0", "0", "--steps", "3"], Some(&cfg));
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "iteration,x");
    assert_eq!(lines.len(), 5);
    // f(0) = 1 and f(1) = 0.1 for this construction.
    let x1: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((x1 - 1.0).abs() < 1e-12);
    let o = run(
        &["simulate", "--x0", "0", "--steps", "3", "--format", "json"],
        Some(&cfg),
    );
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["states"].as_array().unwrap().len(), 4);
    let o = run(&["simulate", "--x0", "1.5"], Some(&cfg));
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bifurcate_is_deterministic_and_writes_out() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "s.json",
        r#"{"game":{"p":0.4},"protocol":{"kind":"perturbed_ppi"},
            "scan":{"delta_min":0.1,"delta_max":1.0,"delta_steps":7,"transient":500,"keep":5}}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = bin()
            .args(["bifurcate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "delta,seed_index,seed,plot_rank,iteration,x"
    );
    assert_eq!(text.lines().count(), 1 + 7 * 2 * 5);

    // flags override the config section
    let o = run(
        &["bifurcate", "--delta-steps", "2", "--keep", "1"],
        Some(&cfg),
    );
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 2);
    let o = run(
        &["bifurcate", "--delta-min", "2", "--delta-max", "1"],
        Some(&cfg),
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn cobweb_from_pl_map() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "pl.json",
        r#"{"pl_map":{"nodes":[[0,0],[0.2,0.99],[0.6,0.01],[1,1]]},"x0":0.3}"#,
    );
    let o = run(&["cobweb", "--grid", "11"], Some(&cfg));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "series,index,x,y");
    assert_eq!(text.lines().filter(|l| l.starts_with("graph,")).count(), 11);
    assert_eq!(
        text.lines().filter(|l| l.starts_with("cobweb,")).count(),
        1 + 2 * 50
    );
}

#[test]
fn periods_lists_each_period() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "inn.json", INNOVATIVE);
    let o = run(&["periods", "--n-max", "5"], Some(&cfg));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for n in 1..=5 {
        assert!(
            text.lines()
                .skip(1)
                .any(|l| l.starts_with(&format!("{n},"))),
            "period {n}"
        );
    }
    let o = run(&["periods", "--n-max", "0"], Some(&cfg));
    assert_eq!(o.status.code(), Some(4));
}
