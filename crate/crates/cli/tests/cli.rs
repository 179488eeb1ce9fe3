use std::process::{Command, Output};

use serde_json::Value;

/// Runs the binary with a whitespace-separated command line.
fn run(line: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frame-module"))
        .args(line.split_whitespace())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(line: &str) -> Value {
    let o = run(&format!("--format json {line}"));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(o.status.code(), Some(0), "{err}");
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn field(doc: &Value, i: usize, key: &str) -> f64 {
    doc["records"][i][key].as_f64().unwrap()
}

#[test]
fn module_prints_one_estimate_per_method() {
    let o = run("module --sigma 1/2 --H 4 --methods exact,leading");
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 2);
    assert!(out.contains("EXACT_SIGMA_HALF") && out.contains("m = 0.0494778624979"));
    assert!(out.contains("LEADING") && out.contains("m = 0.0625"));
}

#[test]
fn exact_at_h64_is_close_to_one_over_4h() {
    let doc = json("module --sigma 1/2 --H 64 --methods exact");
    let v = field(&doc, 0, "value");
    assert!((4.0 * 64.0 * v - 1.0).abs() < 0.05, "{v}");
}

#[test]
fn usage_errors_exit_with_two() {
    let cases = [
        "module --sigma 1/4 --H 1 --methods exact",
        "module --sigma 1/4 --H 2 --methods bowman",
        "module --sigma 1/2 --H 2 --methods=",
        "module --sigma 1/2 --H 2 --methods fast",
        "module --sigma x --H 2 --methods leading",
        "module --sigma 1/2 --H 0.5 --methods leading",
        "module --sigma 1/2 --H 2 --methods oracle --h0 0.1x",
        "module --sigma 1/2 --H 64 --methods oracle",
        "module --sigma 1/2 --H 2 --methods leading --dump-field /tmp/x",
        "sweep --sigma 1/2 --H 1:4:3 --methods=",
        "sweep --sigma 1/2 --H 1:4 --methods leading",
        "quad slit --c 0 --H 4",
        "quad slit --c 1/2",
        "quad wedge --c 1/2",
        "--tol 2 module --sigma 1/2 --H 2 --methods leading",
        "frobnicate",
    ];
    for line in cases {
        let o = run(line);
        assert_eq!(o.status.code(), Some(2), "{line}");
        assert!(o.stdout.is_empty(), "{line}");
        assert!(!o.stderr.is_empty(), "{line}");
    }
}

#[test]
fn sweep_csv_rows_and_ratio_trend() {
    let o = run("--format csv sweep --sigma 1/2 --H 1:64:7 --spacing log --methods exact,leading");
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "sigma,H,method,value,est_error,ratio_to_leading,runtime_ms,error"
    );
    assert_eq!(lines.len(), 15);
    let ratios: Vec<f64> = lines[1..]
        .iter()
        .filter(|l| l.contains(",EXACT_SIGMA_HALF,"))
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 7);
    assert!(
        ratios.windows(2).all(|w| w[0] < w[1] && w[1] < 1.0),
        "{ratios:?}"
    );
}

#[test]
fn sweep_records_zero_a_at_golden_sigma() {
    let doc = json("sweep --sigma 0.3819660112501051 --H 16:32:2 --methods large-h");
    for i in 0..2 {
        let a = doc["records"][i]["trace"]["a"].as_f64().unwrap();
        assert!(a.abs() < 1e-14, "{a}");
    }
}

#[test]
fn sweep_keeps_per_row_errors() {
    // σ = 0.999 at H = 64 has no representable large-H modulus
    let o = run("--format csv sweep --sigma 0.5,0.999 --H 64:64:1 --methods large-h");
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(','));
    assert!(!rows[1].ends_with(','));
    let all_bad = run("sweep --sigma 0.999 --H 64:64:1 --methods large-h");
    assert_eq!(all_bad.status.code(), Some(1));
}

#[test]
fn identical_flags_give_identical_output() {
    let line = "--format json sweep --sigma 1/2,1/4 --H 1:4:3 --methods leading,large-h,oracle --h0 1/8 --levels 2";
    let a = run(line);
    let b = run(line);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn quad_commands() {
    let o = run("quad slit --c 1/2 --H 16 --methods leading");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("m = 8 "));

    let g = json("quad slitted-square --c 1/2 --n 2 --methods oracle --h0 1/32");
    let q = json("quad slit --c 1/2 --H 4 --methods oracle --h0 1/8");
    let (mg, eg) = (field(&g, 0, "value"), field(&g, 0, "est_error"));
    let (mq, eq) = (field(&q, 0, "value"), field(&q, 0, "est_error"));
    assert!((mg * 4.0 - mq).abs() <= 4.0 * eg + eq, "{mg} {mq}");
}

#[test]
fn out_and_dump_field_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let dump = dir.path().join("field.txt");
    let o = run(&format!(
        "--format csv --out {} --dump-field {} module --sigma 1/2 --H 1 --methods oracle --h0 1/8 --levels 2",
        out.display(),
        dump.display()
    ));
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.starts_with("sigma,H,method,"));
    let matrix = std::fs::read_to_string(&dump).unwrap();
    let mut lines = matrix.lines();
    assert_eq!(lines.next(), Some("0.0625 17 17"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 17);
    assert!(rows.iter().all(|r| r.split_whitespace().count() == 17));
}

#[test]
fn validate_fast_and_fault_injection() {
    let ok = run("validate --profile fast");
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(!stdout(&ok).contains("[FAIL]"));
    let bad = run("validate --inject-fault double-mu");
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("[FAIL] 1 "));
}
