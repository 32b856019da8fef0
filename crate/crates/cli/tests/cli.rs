use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const CONFIG: &str = r#"{
  "mode": "pointwise",
  "truth": {
    "density": {"kind": "uniform"},
    "regression": {"kind": "sine_linear", "freq": 1.0, "linear": [0.0, 1.0]},
    "noise": {"kind": "gaussian", "sigma": 0.5}
  },
  "d": 2,
  "splitter": {
    "kind": "centered",
    "feature_probs": [0.5, 0.5],
    "schedule": {"kind": "log2_power_depth", "beta": 0.5}
  },
  "n_grid": [64, 256],
  "replications": 8,
  "query_points": [[0.3, 0.6], [0.8, 0.1]],
  "master_seed": 7
}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_honest-forest"));
    c.env_remove("HONEST_FOREST_THREADS");
    c
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn simulate(config: &Path, out: &Path, threads: Option<&str>) -> Output {
    let mut c = bin();
    c.arg("simulate")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out);
    if let Some(t) = threads {
        c.env("HONEST_FOREST_THREADS", t);
    }
    c.output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn simulate_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("run");
    let res = simulate(&cfg, &out, None);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    for f in ["results.csv", "summary.json", "config.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 7);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.starts_with("mode,n,query_id,x1,x2,metric,value,std_err,empty_rate,replication_count\n"));
}

#[test]
fn descending_grid_is_a_config_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("[64, 256]", "[256, 64]"));
    let res = simulate(&cfg, &dir.path().join("run"), None);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("n_grid"), "{err}");
    assert!(err.contains("config.json:14:"), "{err}");
    assert!(!dir.path().join("run").exists());
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("\"d\": 2,", "\"d\": 2"));
    let res = simulate(&cfg, &dir.path().join("run"), None);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &CONFIG.replace("\"d\": 2,", "\"d\": 2, \"depth\": 3,"),
    );
    let res = simulate(&cfg, &dir.path().join("run"), None);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn results_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let mut outputs = Vec::new();
    for (i, t) in [None, Some("1"), Some("3")].into_iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        assert!(simulate(&cfg, &out, t).status.success());
        outputs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    for bad in ["0", "many", "-2"] {
        let res = simulate(&cfg, &dir.path().join("run"), Some(bad));
        assert_eq!(res.status.code(), Some(2), "{bad}");
    }
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let res = simulate(&cfg, &blocker.join("run"), None);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn multinomial_moments() {
    let out = bin()
        .args(["moments", "--scheme", "multinomial", "--m", "100", "--n", "100"])
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    let a = &doc["analytic"];
    assert!((a["l21_ratio"].as_f64().unwrap() - 1.99).abs() < 1e-12);
    assert!((a["correlation_ratio"].as_f64().unwrap() - 0.99).abs() < 1e-12);
    assert!((a["adjusted_mixed"].as_f64().unwrap() + 0.01).abs() < 1e-12);
}

#[test]
fn without_replacement_moments() {
    let out = bin()
        .args([
            "moments",
            "--scheme",
            "without-replacement",
            "--m",
            "50",
            "--n",
            "100",
        ])
        .output()
        .unwrap();
    let a = &stdout_json(&out)["analytic"];
    assert!((a["l21_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((a["cross_w1w2"].as_f64().unwrap() - 2450.0 / 9900.0).abs() < 1e-12);
}

#[test]
fn poisson_moments_with_monte_carlo() {
    let out = bin()
        .args([
            "moments",
            "--scheme",
            "wild-poisson",
            "--n",
            "50",
            "--reps",
            "4000",
            "--seed",
            "3",
        ])
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    assert_eq!(doc["analytic"]["adjusted_mixed"].as_f64().unwrap(), 0.0);
    let emp = doc["empirical"]["mean_w1"].as_f64().unwrap();
    let se = doc["empirical_std_err"]["mean_w1"].as_f64().unwrap();
    assert!((emp - 1.0).abs() < 5.0 * se.max(1e-3));
}

#[test]
fn multinomial_moments_need_m() {
    let out = bin()
        .args(["moments", "--scheme", "multinomial"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn recursion_limits() {
    let out = bin()
        .args(["recursion", "--p", "0.3333333333333333"])
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    assert!((doc["limit"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((doc["g1"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let out = bin().args(["recursion", "--p", "0.25"]).output().unwrap();
    let doc = stdout_json(&out);
    assert!((doc["zero_prob_limit"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn recursion_rejects_bad_probability() {
    for p in ["1.5", "0", "1"] {
        let out = bin().args(["recursion", "--p", p]).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{p}");
    }
}

fn verdict(args: &[&str]) -> String {
    let out = bin().arg("probe").args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,log_term,log_partial_sum\n"));
    let last = text.lines().last().unwrap().to_string();
    assert!(last.contains("not proof"), "{last}");
    last
}

#[test]
fn probe_verdicts() {
    assert!(verdict(&["--schedule", "poly:0.4"]).starts_with("verdict: does not decay"));
    assert!(verdict(&["--schedule", "sqrtlog:2.0"]).starts_with("verdict: decays"));
    // Slowly turning series: whatever the verdict, the probe must report one.
    assert!(verdict(&["--schedule", "poly:0.6", "--d", "2"]).starts_with("verdict: "));
}

#[test]
fn probe_rejects_bad_schedule() {
    for s in ["poly:7", "nonsense", "poly:"] {
        let out = bin().args(["probe", "--schedule", s]).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{s}");
    }
}

#[test]
fn delta_probe_lists_the_grid() {
    let out = bin()
        .args([
            "probe",
            "--schedule",
            "poly:0.5",
            "--mode",
            "delta",
            "--n-max",
            "100000",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 4);
}
