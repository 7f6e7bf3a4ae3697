use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn linear_ea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linear-ea"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = linear_ea(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn constants_output() {
    let v = json_ok(&["constants", "--tol", "1e-8"]);
    assert!((v["alpha"].as_f64().unwrap() - 1.54468).abs() < 1e-4);
    assert!((v["beta"].as_f64().unwrap() - 3.55248).abs() < 1e-4);
    assert!(v["residual"].as_f64().unwrap().abs() <= 1e-6);
    assert!((v["h_alpha_beta"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
}

#[test]
fn run_prints_result_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let t = trace.to_str().unwrap();
    let v = json_ok(&["run", "--fn", "onemax:200", "--policy", "adaptive", "--seed", "3", "--trace", t]);
    assert_eq!(v["found"], true);
    assert_eq!(v["seed"], 3);
    let text = std::fs::read_to_string(&trace).unwrap();
    let rounds: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rounds[0]["m"], 2);
    let total: u64 = rounds
        .iter()
        .map(|r| r["estimation_evals"].as_u64().unwrap() + r["optimization_evals"].as_u64().unwrap())
        .sum();
    assert_eq!(total, v["evaluations"].as_u64().unwrap());

    let v = json_ok(&["run", "--fn", "binval:20", "--policy", "optimal", "--trace", t, "--trace-stride", "10"]);
    let text = std::fs::read_to_string(&trace).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["evaluation"], v["evaluations"]);
    assert_eq!(last["fitness"], 0);
}

#[test]
fn run_is_reproducible_and_censors() {
    let args = ["run", "--fn", "random:300:50:9", "--policy", "known-n", "--seed", "12"];
    assert_eq!(linear_ea(&args).stdout, linear_ea(&args).stdout);
    let v = json_ok(&["run", "--fn", "onemax:5000", "--policy", "constant:0.0002", "--max-evals", "5"]);
    assert_eq!(v["found"], false);
    assert_eq!(v["evaluations"], 5);
}

#[test]
fn bad_arguments_fail() {
    for args in [
        &["run", "--fn", "onemax:10", "--policy", "constant:2"][..],
        &["run", "--fn", "binval:64", "--policy", "optimal"],
        &["run", "--fn", "nonesuch:10", "--policy", "optimal"],
        &["isu-diagnostic", "--spec", "optimal", "--n", "10"],
    ] {
        let out = linear_ea(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn bench_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "8", "1"].iter().enumerate() {
        let csv = dir.path().join(format!("t{i}.csv"));
        let report = dir.path().join(format!("r{i}.json"));
        let body = format!(
            r#"{{"function":"random:20:4","policy":"optimal","n_grid":[30,60],"trials":40,"base_seed":5,"csv":{:?},"report":{:?}}}"#,
            csv, report
        );
        let cfg = write_config(dir.path(), &format!("c{i}.json"), &body);
        let out = linear_ea(&["bench", "--config", &cfg, "--workers", workers]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read(&report).unwrap()));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(csv.starts_with("policy,function,n,trial,seed,evaluations,found\n"));
    assert_eq!(csv.lines().count(), 1 + 80);
    assert!(!csv.contains('\r'));
}

#[test]
fn compare_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mk = |name: &str, policy: &str, seed: u64| {
        let report = dir.path().join(format!("{name}.json"));
        let body = format!(
            r#"{{"function":"onemax","policy":"{policy}","n_grid":[100],"trials":60,"base_seed":{seed},"report":{report:?}}}"#
        );
        let cfg = write_config(dir.path(), &format!("{name}.cfg"), &body);
        assert!(linear_ea(&["bench", "--config", &cfg]).status.success());
        report.to_str().unwrap().to_owned()
    };
    let a = mk("a", "optimal", 1);
    let b = mk("b", "known-n", 2);
    let same = json_ok(&["compare", "--a", &a, "--b", &a, "--n", "100"]);
    assert_eq!(same["ratio"].as_f64().unwrap(), 1.0);
    assert!(same["ci_low"].as_f64().unwrap() <= 1.0 && same["ci_high"].as_f64().unwrap() >= 1.0);
    let r = json_ok(&["compare", "--a", &a, "--b", &b, "--n", "100"]);
    assert!(r["ratio"].as_f64().unwrap() > 1.0);
    assert!(!linear_ea(&["compare", "--a", &a, "--b", &b, "--n", "77"]).status.success());
}

#[test]
fn isu_diagnostic() {
    let v = json_ok(&["isu-diagnostic", "--spec", "isu:iterlog:1", "--n", "1000"]);
    assert_eq!(v["n"], 1000);
    let m = v["m_n"].as_f64().unwrap();
    let cap = 1000f64.powf(1.01) / 1000f64.ln();
    assert!(m > 0.0 && m <= cap * (1.0 + 1e-12));
    let v0 = json_ok(&["isu-diagnostic", "--spec", "isu:iterlog:0", "--n", "1000"]);
    assert!(v0["rate_sum"].as_f64().unwrap() > v["rate_sum"].as_f64().unwrap());
}
