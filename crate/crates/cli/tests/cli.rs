use std::process::{Command, Output};

fn tcoal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcoal"))
        .args(args)
        .env_remove("TCOAL_THREADS")
        .output()
        .expect("run tcoal")
}

#[test]
fn rates_report_uniform_beta() {
    let out = tcoal(&["rates", "--measure", "beta:1,1", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rates"][1]["lambda_b"], 2.0);
    assert_eq!(v["rates"][1]["first_jump"][0], 0.75);
}

#[test]
fn rates_tsv_has_one_row_per_pair() {
    let out = tcoal(&["rates", "--measure", "kingman", "--n", "5", "--format", "tsv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("b\tk\t"));
    assert_eq!(text.lines().count(), 1 + (2..=5).map(|b| b - 1).sum::<usize>());
}

#[test]
fn bad_measure_is_a_configuration_error() {
    let out = tcoal(&["rates", "--measure", "beta:0,1", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('^'));
}

#[test]
fn missing_scenario_file_fails() {
    let out = tcoal(&["scenario", "check", "/nonexistent/x.scen"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn failed_comparison_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = tcoal(&[
        "compare", "pair-time", "--model", "moran:kingman", "--N", "200", "--reps", "200", "--seed", "1",
        "--tolerance", "0.0001", "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["n_reps"], 200);
    assert!(v["runtime_s"].is_null());
}

#[test]
fn limit_simulation_ends_in_one_block() {
    let out = tcoal(&["simulate", "limit", "--measure", "beta:1,1", "--n", "6", "--reps", "20", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = text.lines().skip(1).map(|l| l.split('\t').collect::<Vec<_>>());
    let mut finished = 0;
    for row in rows.by_ref() {
        let after: u64 = row[4].parse().unwrap();
        let before: u64 = row[2].parse().unwrap();
        let size: u64 = row[3].parse().unwrap();
        assert_eq!(before + 1 - size, after);
        finished += (after == 1) as usize;
    }
    assert_eq!(finished, 20);
}

#[test]
fn summary_goes_to_stderr_by_default() {
    let out = tcoal(&["simulate", "limit", "--measure", "kingman", "--n", "3", "--reps", "5", "--seed", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["replicates"], 5);
}
