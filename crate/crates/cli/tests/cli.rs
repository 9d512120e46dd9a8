use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rellich-lab"))
        .args(args)
        .env_remove("RELLICH_LAB_PRECISION")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().expect("exit code");
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    });
    (code, v)
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn check<'a>(rep: &'a Value, name: &str) -> &'a Value {
    rep["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).expect(name)
}

#[test]
fn weights_single_row() {
    let (code, rep) = report(&["weights", "--order", "1", "--from", "1", "--to", "1"]);
    assert_eq!(code, 0);
    let rows = rep["results"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((f(&rows[0]["rho"]) - (2.0 - 2f64.sqrt())).abs() < 1e-15);
    assert_eq!(rep["schema"], "rellich-lab/report/1");
}

#[test]
fn weights_ratios_above_one() {
    let (code, rep) = report(&["weights", "--order", "2", "--from", "2", "--to", "10"]);
    assert_eq!(code, 0);
    let rows = rep["results"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| f(&r["ratio"]) > 1.0));
}

#[test]
fn weights_below_order_is_usage_error() {
    assert_eq!(run(&["weights", "--order", "2", "--from", "1", "--to", "4"]).status.code(), Some(1));
}

#[test]
fn clap_errors_exit_one_and_help_exits_zero() {
    assert_eq!(run(&["weights", "--nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn factorize_thousand() {
    let (code, rep) = report(&["factorize", "--n-max", "1000"]);
    assert_eq!(code, 0);
    let z1 = f(&rep["results"][0]["zeta"]);
    assert!((z1 - 6.117556).abs() < 1e-6);
    assert!(rep["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert_eq!(rep["precision"], "ext");
}

#[test]
fn factorize_too_small() {
    assert_eq!(run(&["factorize", "--n-max", "1"]).status.code(), Some(1));
}

#[test]
fn identity_both_orders() {
    for (order, tol) in [("1", "1e-12"), ("2", "1e-10")] {
        let (code, rep) = report(&[
            "verify", "identity", "--order", order, "--trials", "1000", "--support", "512", "--tol", tol,
        ]);
        assert_eq!(code, 0, "order {order}");
        assert!(f(&rep["results"][0]["max_relative_residual"]) <= tol.parse::<f64>().unwrap());
    }
}

#[test]
fn identity_failure_exits_two() {
    let out = run(&["verify", "identity", "--order", "2", "--trials", "5", "--support", "40", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

fn without_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn same_seed_same_report() {
    let args = ["verify", "identity", "--order", "2", "--trials", "50", "--support", "64", "--seed", "11"];
    let (_, a) = report(&args);
    let (_, b) = report(&args);
    assert_eq!(a["seed"], 11);
    assert_eq!(
        serde_json::to_string(&without_time(a)).unwrap(),
        serde_json::to_string(&without_time(b)).unwrap()
    );
}

#[test]
fn hardy_critical_rows() {
    let (code, rep) = report(&["optimality", "hardy-critical", "--N-list", "4,16,64,256"]);
    assert_eq!(code, 0);
    let rows = rep["results"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let n = f(&r["N"]);
        assert!(f(&r["remainder_norm2"]) <= 4.0 / n.ln());
    }
}

#[test]
fn rellich_infinity_reports_denominator_check() {
    let (code, rep) = report(&["optimality", "rellich-infinity", "--N-list", "16,64"]);
    assert!(code == 0 || code == 2);
    assert_eq!(check(&rep, "weighted_exceeds_log2_bound")["passed"], true);
    assert_eq!(check(&rep, "ratio_strictly_decreasing")["passed"], true);
}

#[test]
fn distance_first_entry() {
    let (code, rep) = report(&["optimality", "distance", "--N-list", "4,16,64"]);
    assert_eq!(code, 0);
    assert_eq!(check(&rep, "first_entry_is_minus_c1")["passed"], true);
}

#[test]
fn combinatorics_identity_grid() {
    let (code, rep) = report(&["combinatorics", "identity", "--s-max", "12", "--k-max", "12"]);
    assert_eq!(code, 0);
    assert_eq!(rep["results"].as_array().unwrap().len(), 169);
    assert_eq!(check(&rep, "all_equal")["passed"], true);
}

#[test]
fn combinatorics_series_exact() {
    let (code, rep) = report(&["combinatorics", "series", "--order", "3", "--terms", "2"]);
    assert_eq!(code, 0);
    assert_eq!(rep["results"][0]["coefficient"], "225/64");
}

#[test]
fn best_constant_nonincreasing() {
    let (code, rep) = report(&["spectral", "best-constant", "--sizes", "2,16,128"]);
    assert_eq!(code, 0);
    let v: Vec<f64> = rep["results"].as_array().unwrap().iter().map(|r| f(&r["lambda_min"])).collect();
    assert!(v.windows(2).all(|p| p[1] <= p[0]));
    assert!((v[0] - (101.0 - 9305f64.sqrt()) / 2.0).abs() < 1e-10);
}

#[test]
fn precision_from_environment_and_flag() {
    let bin = env!("CARGO_BIN_EXE_rellich-lab");
    let args = ["spectral", "hardy", "--sizes", "8"];
    let out = Command::new(bin).args(args).env("RELLICH_LAB_PRECISION", "f64").output().unwrap();
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["precision"], "f64");
    let out = Command::new(bin)
        .args(args)
        .args(["--precision", "ext"])
        .env("RELLICH_LAB_PRECISION", "f64")
        .output()
        .unwrap();
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["precision"], "ext");
    let out = Command::new(bin).args(args).env("RELLICH_LAB_PRECISION", "quad").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_and_output_file() {
    let dir = std::env::temp_dir().join(format!("rellich-lab-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("w.csv");
    let out = run(&[
        "weights", "--order", "1", "--from", "1", "--to", "3", "--format", "csv", "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,rho,leading_term,ratio");
    assert_eq!(lines.len(), 4);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn floats_round_trip() {
    let out = run(&["weights", "--order", "2", "--from", "7", "--to", "7"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"rho\"")).unwrap();
    let digits = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = digits.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}
