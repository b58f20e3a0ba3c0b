mod common;

use std::process::{Command, Output};

use common::fixture_path;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympcascade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fx(name: &str) -> String {
    fixture_path(name).display().to_string()
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = run(&full);
    let report = serde_json::from_slice(&out.stdout).expect("report is JSON");
    (out.status.code().unwrap(), report)
}

#[test]
fn sqr_integer_basis_succeeds() {
    let (code, report) = json_report(&["sqr", &fx("integer_basis_V.json")]);
    assert_eq!(code, 0);
    let s = &report["outputs"]["S"];
    assert!((s[0][0].as_f64().unwrap() + 0.4862).abs() < 1e-3);
    assert_eq!(report["outputs"]["mu"][0].as_f64().unwrap(), -952.0);
    assert_eq!(report["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn sqr_skew_orthogonal_cites_prefix_one() {
    let out = run(&["sqr", &fx("skew_orthogonal_V.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N_1"));
}

#[test]
fn malformed_and_missing_files_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["sqr", bad.to_str().unwrap()]).status.code(), Some(1));
    let odd = dir.path().join("odd.json");
    std::fs::write(
        &odd,
        r#"{"schema_version":1,"mode":"matrix","data":[[1,2,3],[4,5,6],[7,8,9]]}"#,
    )
    .unwrap();
    assert_eq!(run(&["sqr", odd.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(
        run(&["sqr", "/nonexistent/file.json"]).status.code(),
        Some(1)
    );
}

#[test]
fn schur_nopa_with_pinned_basis_reproduces_u() {
    let (code, report) = json_report(&[
        "schur",
        &fx("nopa_A.json"),
        "--basis-override",
        &fx("nopa_V.json"),
    ]);
    assert_eq!(code, 0);
    let u = &report["outputs"]["U"];
    let diag = [-5.76e7, -1.44e7, -5.76e7, -1.44e7];
    for (k, want) in diag.iter().enumerate() {
        assert!((u[k][k].as_f64().unwrap() - want).abs() < 1e-4 * want.abs());
    }
}

#[test]
fn schur_exit_codes() {
    assert_eq!(
        run(&["schur", &fx("jordan_chain_A.json")]).status.code(),
        Some(3)
    );
    assert_eq!(run(&["schur", &fx("diag1234.json")]).status.code(), Some(0));
    let alt = run(&[
        "schur",
        &fx("nopa_A.json"),
        "--basis-override",
        &fx("nopa_V_alt.json"),
    ]);
    assert_eq!(alt.status.code(), Some(3));
}

#[test]
fn realize_nopa_reports_two_subsystems() {
    let dir = tempfile::tempdir().unwrap();
    let casc = dir.path().join("cascade.json");
    let (code, report) = json_report(&[
        "realize",
        &fx("nopa_sdh.json"),
        "--basis-override",
        &fx("nopa_V.json"),
        "--cascade-out",
        casc.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let subs = report["outputs"]["subsystems"].as_array().unwrap();
    assert_eq!(subs.len(), 2);
    for sub in subs {
        assert!((sub["qp_coefficient"].as_f64().unwrap() + 5.4e6).abs() < 1.0);
    }
    assert_eq!(report["flags"]["verification_pass"], Value::Bool(true));

    // The written cascade verifies against the original.
    let verify = run(&["verify", &fx("nopa_quad.json"), casc.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
    // And not against an unrelated system.
    let mismatch = run(&["verify", &fx("one_dof_sdh.json"), casc.to_str().unwrap()]);
    assert_eq!(mismatch.status.code(), Some(1), "channel counts differ");
}

#[test]
fn verify_detects_a_different_transfer_function() {
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("other.json");
    let text = std::fs::read_to_string(fixture_path("nopa_sdh.json")).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["R"][0][3] = Value::from(1e6);
    doc["R"][3][0] = Value::from(1e6);
    std::fs::write(&other, doc.to_string()).unwrap();
    let out = run(&["verify", &fx("nopa_sdh.json"), other.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn realize_one_mode_and_corrupted() {
    let (code, report) = json_report(&["realize", &fx("one_dof_sdh.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["outputs"]["subsystems"].as_array().unwrap().len(), 1);
    assert!(
        report["residuals"]["max_transfer_deviation"]
            .as_f64()
            .unwrap()
            < 1e-12
    );

    let (code, report) = json_report(&["realize", &fx("nopa_corrupted.json")]);
    assert_eq!(code, 4);
    assert_eq!(report["flags"]["realizable"], Value::Bool(false));
    assert!(
        report["outputs"]["realizability"]["residuals"][0]
            .as_f64()
            .unwrap()
            > 1e-8
    );
}

#[test]
fn survey_usage_and_smoke() {
    assert_eq!(
        run(&["survey", "--n", "0", "--trials", "5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["survey", "--n", "2", "--trials", "0"]).status.code(),
        Some(1)
    );
    let (code, report) = json_report(&[
        "survey",
        "--n",
        "2",
        "--trials",
        "1",
        "--ensemble",
        "diagonal",
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["outputs"]["survey"]["successes"], Value::from(1));
}

#[test]
fn freqs_flag_is_used() {
    let (code, report) = json_report(&[
        "verify",
        &fx("nopa_quad.json"),
        &fx("nopa_sdh.json"),
        "--freqs",
        "0:1e6,0:1e7",
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        report["outputs"]["verification"]["checks"]
            .as_array()
            .unwrap()
            .len(),
        2
    );
    assert_eq!(
        run(&[
            "verify",
            &fx("nopa_quad.json"),
            &fx("nopa_sdh.json"),
            "--freqs",
            "oops"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn replay_is_byte_identical() {
    let args = ["realize", &fx("nopa_sdh.json"), "--seed", "7"];
    let (_, a) = json_report(&args);
    let (_, b) = json_report(&args);
    assert_eq!(a["outputs"].to_string(), b["outputs"].to_string());
    assert_eq!(a["seed"], Value::from(7));

    let args = ["survey", "--n", "2", "--trials", "20", "--seed", "3"];
    let (_, a) = json_report(&args);
    let (_, b) = json_report(&args);
    assert_eq!(a["outputs"].to_string(), b["outputs"].to_string());
}

#[test]
fn output_flag_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let out = run(&[
        "sqr",
        &fx("integer_basis_V.json"),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.contains("command: sqr"));
}
