use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msdenoise"))
        .args(args)
        .env("RAYON_NUM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &TempDir, case: &str, seed: &str) -> PathBuf {
    let p = path(dir, &format!("{case}-{seed}.csv"));
    assert!(run(&["generate", "--case", case, "--seed", seed, "--output", s(&p)]).status.success());
    p
}

/// Drops the trailing label column.
fn strip_labels(src: &Path, dst: &Path, keep_header: bool) {
    let text = fs::read_to_string(src).unwrap();
    let rows: Vec<String> = text
        .lines()
        .skip(usize::from(!keep_header))
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect();
    fs::write(dst, rows.join("\n") + "\n").unwrap();
}

#[test]
fn denoise_preserves_header_and_order_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let src = generate(&dir, "bullseye1", "3");
    let xy = path(&dir, "xy.csv");
    strip_labels(&src, &xy, true);
    let (o1, o2) = (path(&dir, "o1.csv"), path(&dir, "o2.csv"));
    let report = ok_json(&["denoise", "--input", s(&xy), "--output", s(&o1), "--sweeps", "3"]);
    ok_json(&["denoise", "--input", s(&xy), "--output", s(&o2), "--sweeps", "3"]);
    let a = fs::read(&o1).unwrap();
    assert_eq!(a, fs::read(&o2).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some("x1,x2"));
    assert_eq!(text.lines().count(), 601);
    let r = &report["result"];
    assert!(r["mean_density_after"].as_f64() > r["mean_density_before"].as_f64());
    assert_eq!(report["checks"]["mean_density_increased"], true);
    assert_eq!(report["config"]["sweeps"], 3);
    assert!(report["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
}

#[test]
fn denoise_without_header_and_fixed_bandwidth() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "in.csv");
    fs::write(&input, "0,0\n0.5,0\n3,3\n3.2,3.1\n").unwrap();
    let output = path(&dir, "out.csv");
    let report = ok_json(&["denoise", "--input", s(&input), "--output", s(&output), "--h", "0.5"]);
    assert_eq!(report["result"]["bandwidth"], 0.5);
    let text = fs::read_to_string(&output).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().next().unwrap().split(',').all(|c| c.parse::<f64>().is_ok()));
}

#[test]
fn denoise_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "in.csv");
    fs::write(&input, "a,b\n1,2\n3,x\n").unwrap();
    let output = path(&dir, "out.csv");
    let out = run(&["denoise", "--input", s(&input), "--output", s(&output)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 3, column 2"), "{err}");

    fs::write(&input, "1,2\n3\n").unwrap();
    let out = run(&["denoise", "--input", s(&input), "--output", s(&output)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2 has 1 columns"));

    fs::write(&input, "1,2\n3,4\n5,7\n").unwrap();
    let out = run(&["denoise", "--input", s(&input), "--output", s(&output), "--sweeps", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["denoise", "--input", s(&input), "--output", s(&output), "--h", "-1"]);
    assert!(!out.status.success());
}

#[test]
fn cluster_eval_reports_and_reproduces() {
    let args = ["cluster-eval", "--case", "spiral4", "--algo", "kmeans", "--reps", "1", "--seed", "4"];
    let a = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, run(&args).stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["result"]["before_sd"], 0.0);
    assert_eq!(r["result"]["after_sd"], 0.0);
    assert_eq!(r["result"]["reps"], 1);
    assert_eq!(r["config"]["algo"], "kmeans");

    let off = ok_json(&["cluster-eval", "--case", "spiral4", "--algo", "hier", "--reps", "1", "--msd", "off"]);
    assert!(off["result"]["after_mean"].is_null());
    assert!(off["checks"].as_object().unwrap().is_empty());

    assert!(!run(&["cluster-eval", "--case", "spiral4", "--algo", "dbscan"]).status.success());
    assert!(!run(&["cluster-eval", "--case", "spiral4", "--k", "0", "--reps", "1"]).status.success());
    assert!(!run(&["cluster-eval", "--case", "nosuch", "--reps", "1"]).status.success());
    assert!(!run(&["cluster-eval", "--reps", "1"]).status.success());
}

#[test]
fn cluster_eval_on_labelled_csv() {
    let dir = TempDir::new().unwrap();
    let src = generate(&dir, "anomaly", "2");
    let r = ok_json(&["cluster-eval", "--input", s(&src), "--algo", "kmeans", "--reps", "2", "--msd", "off"]);
    assert_eq!(r["result"]["config"]["k"], 4);
    assert_eq!(r["result"]["replicates"].as_array().unwrap().len(), 2);
}

#[test]
fn dataset_loader_validates_shape() {
    let dir = TempDir::new().unwrap();
    let seeds = path(&dir, "seeds.csv");
    let mut text = String::new();
    for i in 0..210 {
        let row: Vec<String> = (0..7).map(|j| ((i * 7 + j) % 13).to_string()).collect();
        text.push_str(&format!("{},{}\n", row.join(","), 1 + i / 70));
    }
    fs::write(&seeds, &text).unwrap();
    let r = ok_json(&[
        "cluster-eval", "--input", s(&seeds), "--dataset", "seeds", "--algo", "kmeans", "--reps", "1",
        "--msd", "off",
    ]);
    assert_eq!(r["result"]["case"], "seeds");
    assert_eq!(r["result"]["config"]["k"], 3);
    assert_eq!(r["result"]["config"]["bandwidth"]["fixed"], 0.613);

    let bad = path(&dir, "bad.csv");
    let cut: String = text.lines().map(|l| l.rsplitn(3, ',').nth(2).unwrap().to_string() + "\n").collect();
    fs::write(&bad, cut).unwrap();
    let out = run(&["cluster-eval", "--input", s(&bad), "--dataset", "seeds", "--reps", "1"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("expected 210 rows x 7 columns") && err.contains("found 210 rows x 6"), "{err}");
}

#[test]
fn twosample_writes_curve_and_rejects_zero_reps() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "curve.csv");
    let r = ok_json(&[
        "twosample", "--reps", "3", "--n0", "60", "--grid", "0,40", "--permutations", "99", "--csv", s(&csv),
    ]);
    assert_eq!(r["result"]["points"].as_array().unwrap().len(), 2);
    assert_eq!(r["result"]["points"][0]["null"], true);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("value,power_before,power_after,reps"));
    assert_eq!(text.lines().count(), 3);

    let m = ok_json(&[
        "twosample", "--scenario", "mixture-proportion", "--test", "mmd", "--msd", "off", "--reps", "2",
        "--n0", "50", "--grid", "0.5,0.2", "--permutations", "99",
    ]);
    assert!(m["result"]["points"][1]["power_after"].is_null());
    assert!(!run(&["twosample", "--reps", "0"]).status.success());
    assert!(!run(&["twosample", "--grid", "1.5", "--reps", "1"]).status.success());
}

#[test]
fn anomaly_recovers_planted_points_and_writes_traces() {
    let dir = TempDir::new().unwrap();
    let traces = path(&dir, "traces.csv");
    let r = ok_json(&["anomaly", "--seed", "1", "--traces", s(&traces)]);
    let result = &r["result"];
    let top: Vec<u64> = result["top_k"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(top.len(), 10);
    for p in 600..605 {
        assert!(top.contains(&p), "{top:?}");
    }
    assert_eq!(r["checks"]["all_planted_in_top_k"], true);
    let rows: u64 = result["report"]["iterations"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() + 1).sum();
    let text = fs::read_to_string(&traces).unwrap();
    assert_eq!(text.lines().next(), Some("point,step,x1,x2"));
    assert_eq!(text.lines().count() as u64, rows + 1);

    let empty = ok_json(&["anomaly", "--k", "0"]);
    assert!(empty["result"]["top_k"].as_array().unwrap().is_empty());
    assert!(!run(&["anomaly", "--k", "1000"]).status.success());
}

#[test]
fn anomaly_on_csv_input() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "pts.csv");
    fs::write(&input, "x,y\n0,0\n0.1,0\n0,0.1\n0.1,0.1\n3,3\n").unwrap();
    let r = ok_json(&["anomaly", "--input", s(&input), "--k", "1", "--h", "3"]);
    assert_eq!(r["result"]["top_k"][0], 4);
    assert!(r["result"].get("planted").is_none());
}

#[test]
fn theory_checks_pass_and_report() {
    for check in ["ascent", "t5", "t6"] {
        let r = ok_json(&["theory", "--check", check, "--seed", "3"]);
        assert_eq!(r["command"], "theory");
        assert_eq!(r["config"]["check"], check);
        let checks = r["checks"].as_object().unwrap();
        assert!(!checks.is_empty() && checks.values().all(|v| v == true), "{check}: {checks:?}");
    }
    assert!(!run(&["theory", "--check", "t3"]).status.success());
}

#[test]
fn generate_is_seeded() {
    let dir = TempDir::new().unwrap();
    let a = fs::read(generate(&dir, "spiral5", "8")).unwrap();
    let b = fs::read(generate(&dir, "spiral5", "9")).unwrap();
    let out = path(&dir, "again.csv");
    assert!(run(&["generate", "--case", "spiral5", "--seed", "8", "--output", s(&out)]).status.success());
    assert_eq!(a, fs::read(&out).unwrap());
    assert_ne!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 351);
}
