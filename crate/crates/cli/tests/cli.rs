use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lowlying"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn moment_fejer_half_fourth() {
    let out = run(&["moment", "--sigma", "1/2", "--n", "4", "--sign", "minus"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"][0]["exact"], "31/105");
    assert_eq!(r["command"], "moment");
    assert_eq!(r["params"]["sigma"], "1/2");
    assert_eq!(r["pass"], true);
}

#[test]
fn decimal_input_is_a_usage_error() {
    let out = run(&["moment", "--sigma", "0.6", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p/q"), "{err}");
}

#[test]
fn out_of_window_moment_is_a_usage_error() {
    // sigma = 3/5 with n = 6 needs a > 4 > ceil(6/2).
    let out = run(&["moment", "--sigma", "3/5", "--n", "6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_parameter_is_a_usage_error() {
    let out = run(&["moment", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vanish_order_five() {
    let out = run(&["vanish", "--r", "5", "--n", "4", "--sigma", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"][0]["exact"], "496/65625");
}

#[test]
fn vanish_sweep_reports_rows() {
    let out = run(&["vanish", "--r", "5", "--ns", "2,4", "--sigmas", "1/3,1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = report(&out)["results"][0]["table"]["rows"].as_array().unwrap().len();
    assert_eq!(rows, 4);
}

#[test]
fn crosscheck_passes() {
    let out = run(&["crosscheck", "--n", "4", "--sigma", "1/2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(report(&out)["pass"], true);
}

#[test]
fn verify_combinat_small() {
    let out = run(&["verify", "combinat", "--n", "5", "--a", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn verify_arith_small() {
    let out = run(&["verify", "arith", "--qmax", "40"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn empty_config_takes_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.cfg", "");
    let out = run(&["--config", &cfg, "moment", "--sigma", "1/2", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["params"]["sign"], "minus");
    assert_eq!(r["results"][0]["exact"], "31/105");
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "command = moment\nsigma = 1/3\nn = 4\n");
    let r = report(&run(&["--config", &cfg, "moment", "--sigma", "1/2"]));
    assert_eq!(r["params"]["sigma"], "1/2");
    assert_eq!(r["results"][0]["exact"], "31/105");
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "sigma = 1/2\nflavour = plain\n");
    let out = run(&["--config", &cfg, "moment", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn config_for_another_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.cfg", "command = vanish\nr = 5\n");
    let out = run(&["--config", &cfg, "moment", "--sigma", "1/2", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

fn params_as_config(r: &Value) -> String {
    r["params"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| format!("{k} = {}\n", v.as_str().unwrap()))
        .collect()
}

#[test]
fn embedded_config_replays_exact_results() {
    let dir = tempfile::tempdir().unwrap();
    let first = report(&run(&["moment", "--sigma", "3/5", "--n", "3", "--sign", "plus"]));
    let cfg = write(dir.path(), "replay.cfg", &params_as_config(&first));
    let out = run(&["--config", &cfg, "moment"]);
    assert_eq!(out.status.code(), Some(0));
    let second = report(&out);
    assert_eq!(first["params"], second["params"]);
    assert_eq!(first["results"], second["results"]);
}

#[test]
fn json_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&["--json", path.to_str().unwrap(), "vanish", "--r", "5", "--n", "4", "--sigma", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(on_disk["results"], report(&out)["results"]);
}

fn rmt_run(dir: &Path, name: &str, threads: &str) -> (Value, String) {
    let csv = dir.join(name);
    let out = run(&[
        "--threads", threads, "rmt", "--M", "10", "--samples", "300", "--sigma", "1/4", "--seed", "7", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    (report(&out), std::fs::read_to_string(csv).unwrap())
}

#[test]
fn rmt_csv_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (r1, c1) = rmt_run(dir.path(), "a.csv", "1");
    let (r4, c4) = rmt_run(dir.path(), "b.csv", "4");
    let lines: Vec<&str> = c1.lines().collect();
    assert_eq!(lines[0], "sample_index,Z");
    assert_eq!(lines.len(), 301);
    assert!(lines[1].starts_with("0,"));
    assert_eq!(c1, c4);
    assert_eq!(r1["results"], r4["results"]);
    assert_eq!(r1["seed"], 7);
    assert_eq!(r1["params"]["parity"], "even");
}

#[test]
fn rmt_rejects_zero_dimension() {
    let out = run(&["rmt", "--M", "0", "--samples", "10", "--sigma", "1/4"]);
    assert_eq!(out.status.code(), Some(2));
}
