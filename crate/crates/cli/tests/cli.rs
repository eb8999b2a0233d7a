use serde_json::Value;
use std::process::{Command, Output};

fn asianq(args: &[&str]) -> Output {
    asianq_env(args, None)
}

fn asianq_env(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_asianq"));
    cmd.args(args).env_remove("ASIANQ_SEED");
    if let Some(s) = seed {
        cmd.env("ASIANQ_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const CASE3: &[&str] = &[
    "--r", "0.0125", "--sigma", "0.25", "--T", "2", "--strike", "2", "--spot", "2",
];
const CASE5: &[&str] = &[
    "--r", "0.05", "--sigma", "0.5", "--T", "1", "--strike", "2", "--spot", "2",
];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(tail).copied().collect()
}

#[test]
fn table_one_row() {
    let v = json(&asianq(&["tables", "--which", "1"]));
    let cell = &v["table1"]["cells"][0];
    assert_eq!(cell["sigma"], 0.2);
    assert_eq!(cell["T"], 1.0);
    assert_eq!(cell["paper"]["mantissa"], 2.627);
    assert_eq!(cell["paper"]["exp10"], 213);
    assert_eq!(cell["computed"]["exp10"], 213);
    assert!(v.get("table2").is_none() && v.get("table3").is_none());
}

#[test]
fn table_two_case_three_price() {
    let v = json(&asianq(&with(&["price"], CASE3)));
    assert_eq!(v["result"]["method"], "hermite");
    let c0 = v["diagnostics"]["market_price"].as_f64().unwrap();
    assert_eq!(format!("{c0:.3}"), "0.172");
    assert!(v["diagnostics"]["table2_scaling"].is_string());
    for key in ["nu", "h", "q", "k", "q_star"] {
        assert!(v["normalized"][key].is_number(), "{key}");
    }
}

#[test]
fn nonpositive_strike_skips_inversion() {
    let v = json(&asianq(&[
        "price", "--sigma", "0.3", "--T", "1", "--strike", "0", "--spot", "2", "--route", "laplace",
    ]));
    assert_eq!(v["result"]["method"], "closed_form");
    assert_eq!(v["diagnostics"]["inversion_performed"], false);
    assert!(v["diagnostics"].get("transform_evaluations").is_none());
    // seasoned contract whose accrued average already exceeds the strike
    let v = json(&asianq(&[
        "price",
        "--sigma",
        "0.3",
        "--t0",
        "0",
        "--t",
        "0.5",
        "--T",
        "1",
        "--strike",
        "2",
        "--spot",
        "2",
        "--accrued",
        "3",
    ]));
    assert!(v["normalized"]["q"].as_f64().unwrap() <= 0.0);
    assert_eq!(v["result"]["method"], "closed_form");
}

#[test]
fn routes_can_be_forced() {
    let lap = json(&asianq(&with(&["price", "--route", "laplace"], CASE5)));
    let yor = json(&asianq(&with(&["price", "--route", "yor"], CASE5)));
    assert_eq!(lap["result"]["method"], "laplace");
    assert_eq!(yor["result"]["method"], "yor");
    let (a, b) = (
        lap["result"]["value"].as_f64().unwrap(),
        yor["result"]["value"].as_f64().unwrap(),
    );
    assert!((a - b).abs() < 1e-3 * a);
}

#[test]
fn byte_identical_reports() {
    let args = with(&["mc", "--paths", "5000", "--steps", "16", "--seed", "3"], CASE5);
    let a = asianq(&args);
    let b = asianq(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let p = with(&["price"], CASE3);
    assert_eq!(asianq(&p).stdout, asianq(&p).stdout);
}

#[test]
fn seed_from_environment() {
    let args = with(&["mc", "--paths", "2000", "--steps", "8"], CASE5);
    let env = json(&asianq_env(&args, Some("77")));
    assert_eq!(env["request"]["mc"]["seed"], 77);
    let flagged = with(&["mc", "--paths", "2000", "--steps", "8", "--seed", "77"], CASE5);
    assert_eq!(asianq(&flagged).stdout, asianq_env(&args, Some("77")).stdout);
    // the flag wins over the variable
    let both = json(&asianq_env(
        &with(&["mc", "--paths", "2000", "--steps", "8", "--seed", "4"], CASE5),
        Some("77"),
    ));
    assert_eq!(both["request"]["mc"]["seed"], 4);
}

#[test]
fn errors_are_json_on_stderr() {
    let out = asianq(&["price", "--sigma", "-0.3", "--T", "1", "--strike", "2", "--spot", "2"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "invalid_input");

    let out = asianq(&["price", "--route", "nowhere"]);
    assert_eq!(out.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "usage");

    // the triple integral refuses short maturities
    let out = asianq(&[
        "price", "--route", "yor", "--r", "0.09", "--sigma", "0.2", "--T", "1", "--strike", "2", "--spot", "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "practicality");
}

#[test]
fn csv_tables_carry_paper_labels() {
    let out = asianq(&["tables", "--which", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sigma,\"C^(nu)(h,q)\",hermite,deviation"));
    assert_eq!(lines.count(), 4);
    let out = asianq(&["tables", "--which", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Case,r,sigma,T,S_0,nu,2C^(nu),laplace,hermite"));
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn all_tables_pass_the_regression_gate() {
    let v = json(&asianq(&["tables"]));
    let rows = v["table3"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r["within_tolerance"] == true));
    let cases = v["table2"]["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 7);
    for c in cases {
        let d = c["laplace"]["scaled"].as_f64().unwrap() - c["hermite"]["scaled"].as_f64().unwrap();
        assert!(d.abs() < 1e-6);
    }
}

#[test]
fn xcheck_routes_agree() {
    let v = json(&asianq(&with(
        &["xcheck", "--paths", "20000", "--steps", "32", "--seed", "1"],
        CASE5,
    )));
    let routes = v["routes"].as_array().unwrap();
    assert_eq!(routes.len(), 4);
    assert!(routes.iter().all(|r| r.get("result").is_some()), "{routes:?}");
    let pairs = v["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 6);
    assert!(pairs.iter().all(|p| p["agree"] == true), "{pairs:?}");
}

#[test]
fn xcheck_reports_failing_route() {
    // h = 0.01: the triple integral is refused but the others agree
    let v = json(&asianq(&[
        "xcheck", "--r", "0.09", "--sigma", "0.2", "--T", "1", "--strike", "2", "--spot", "2", "--paths", "20000",
        "--steps", "32",
    ]));
    let yor = v["routes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["route"] == "yor")
        .unwrap();
    assert_eq!(yor["error"]["kind"], "practicality");
    assert_eq!(v["pairs"].as_array().unwrap().len(), 3);
}

#[test]
fn transform_routes_agree() {
    let v = json(&asianq(&with(&["transform", "--z-re", "4", "--z-im", "3"], CASE5)));
    assert!(v["diagnostics"]["closed_vs_weber_rel"].as_f64().unwrap() < 1e-8);
}

#[test]
fn help_exits_cleanly() {
    let out = asianq(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("tables"));
}
