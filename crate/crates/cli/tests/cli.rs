//! End-to-end tests of the binary: output schema, determinism, exit codes.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoepr"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_json(args: &[&str]) -> serde_json::Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout should be valid JSON")
}

fn assert_all_numbers_finite(value: &serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            assert!(n.as_f64().is_some_and(f64::is_finite), "non-finite: {n}")
        }
        serde_json::Value::Array(items) => items.iter().for_each(assert_all_numbers_finite),
        serde_json::Value::Object(map) => map.values().for_each(assert_all_numbers_finite),
        _ => {}
    }
}

#[test]
fn lambda_small_order_two() {
    let v = stdout_json(&["lambda", "--order", "2", "--trunc", "10"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["order"], 2);
    assert_eq!(v["truncation"], 10);
    assert!((v["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_all_numbers_finite(&v);
}

#[test]
fn lambda_echoes_defaults() {
    let v = stdout_json(&["lambda", "--trunc", "400"]);
    assert_eq!(v["order"], 4);
    assert_eq!(v["tol"], 1e-10);
    assert!((v["lambda"].as_f64().unwrap() - 1.39672823).abs() < 1e-7);
}

#[test]
fn bipartite_scaling() {
    let v = stdout_json(&["bipartite", "--order", "4", "--trunc", "30"]);
    assert!((v["capital_lambda"].as_f64().unwrap() - 5.5868).abs() < 2e-3);
    assert_eq!(v["scaling"]["ok"], true);
    assert_all_numbers_finite(&v);
}

#[test]
fn bipartite_sign_symmetry() {
    let plus = stdout_json(&["bipartite", "--order", "4", "--sign", "plus", "--trunc", "24"]);
    let minus = stdout_json(&["bipartite", "--order", "4", "--sign", "minus", "--trunc", "24"]);
    let a = plus["capital_lambda"].as_f64().unwrap();
    let b = minus["capital_lambda"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
}

#[test]
fn state_report_and_verdict() {
    let v = stdout_json(&[
        "state",
        "--family",
        "squeezed-vacuum",
        "--lambda",
        "-0.9",
        "--criterion",
        "duan",
        "--order",
        "4",
        "--sign",
        "plus",
    ]);
    assert_eq!(v["verdict"], "entangled");
    let expected = 2.0 * 3.0 * (0.1f64 / 1.9).powi(2);
    assert!((v["value"].as_f64().unwrap() - expected).abs() < 1e-8);
    assert!(v["margin"].as_f64().unwrap() > 0.0);
    assert_all_numbers_finite(&v);
}

#[test]
fn state_vacuum_is_inconclusive() {
    let v = stdout_json(&["state", "--family", "vacuum", "--criterion", "power"]);
    assert_eq!(v["verdict"], "inconclusive");
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn state_best_sign_picks_lower_value() {
    let best = stdout_json(&[
        "state", "--family", "psi-n", "--n", "2", "--xi", "0.5", "--criterion", "power",
        "--best-sign",
    ]);
    assert_eq!(best["sign"], "minus");
    let fixed = stdout_json(&[
        "state", "--family", "psi-n", "--n", "2", "--xi", "0.5", "--criterion", "power",
        "--sign", "plus",
    ]);
    assert!(best["value"].as_f64().unwrap() < fixed["value"].as_f64().unwrap());
}

#[test]
fn gaussian_scan_deterministic_bytes() {
    let args = ["gaussian-scan", "--samples", "300", "--seed", "11"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "same seed must be byte-identical");
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["violations"], 0);
    assert!(v["min_value"].as_f64().unwrap() >= 2.0 - 1e-9);
    assert_all_numbers_finite(&v);
}

#[test]
fn wavefunction_csv_shape() {
    let out = run(&[
        "wavefunction",
        "--order",
        "4",
        "--grid-min",
        "-2",
        "--grid-max",
        "2",
        "--grid-step",
        "1",
        "--derivs",
        "4",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut data_rows = 0;
    let mut saw_header = false;
    for line in text.lines() {
        if line.starts_with('#') {
            continue;
        }
        if line == "x,psi" {
            saw_header = true;
            continue;
        }
        let (x, psi) = line.split_once(',').expect("two CSV columns");
        assert!(x.parse::<f64>().unwrap().is_finite());
        assert!(psi.parse::<f64>().unwrap().is_finite());
        data_rows += 1;
    }
    assert!(saw_header);
    assert_eq!(data_rows, 5);
    assert!(text.contains("derivative_at_zero[0]=0.732538"));
    assert!(text.contains("max_ode_residual="));
}

#[test]
fn fit_output() {
    let v = stdout_json(&["fit", "--order", "4", "--trunc", "300"]);
    assert!((v["a"].as_f64().unwrap() - 0.345424).abs() < 0.02);
    assert!((v["b"].as_f64().unwrap() - 0.402533).abs() < 0.02);
    assert!(v["max_rel_error"].as_f64().unwrap() <= 0.015);
}

#[test]
fn exit_codes() {
    // usage errors → 1
    assert_eq!(run(&["lambda", "--order", "3"]).status.code(), Some(1));
    assert_eq!(run(&["state", "--family", "psi-n", "--xi", "2", "--criterion", "power"])
        .status
        .code(), Some(1));
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    // help → 0
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn threads_flag_accepted() {
    let v = stdout_json(&["lambda", "--order", "2", "--trunc", "10", "--threads", "1"]);
    assert!((v["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
