use std::process::{Command, Output};

use fedosov_cli::{parse_expression, print_polynomial, resolve_order, run, run_demo, RunOptions};
use fedosov_core::{BasePolynomial, MultiIndex, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fedosov"));
    c.env_remove(fedosov_cli::ORDER_ENV);
    c
}

fn names(ns: &[&str]) -> Vec<String> {
    ns.iter().map(|s| s.to_string()).collect()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn write_spec(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const FLAT: &str = r#"{"coordinates":["x1","x2"],"poisson":[["0","1"],["-1","0"]],"functions":{"f":"x1","g":"x1*x2"}}"#;

#[test]
fn parses_the_documented_examples() {
    let xy = names(&["x1", "x2"]);
    let x1 = BasePolynomial::var(2, 0);
    let x2 = BasePolynomial::var(2, 1);
    assert_eq!(parse_expression("x1*x2 + 1", &xy, false).unwrap(), &(&x1 * &x2) + &BasePolynomial::one(2));

    let zz = names(&["z", "zb"]);
    let p = parse_expression("(1 + z*zb)^2", &zz, false).unwrap();
    let expected = BasePolynomial::from_terms(
        2,
        [
            (MultiIndex::from_slice(&[0, 0]), Scalar::one()),
            (MultiIndex::from_slice(&[1, 1]), Scalar::from_int(2)),
            (MultiIndex::from_slice(&[2, 2]), Scalar::one()),
        ],
    );
    assert_eq!(p, expected);

    let p = parse_expression("1/2*x1 - I*x2", &xy, true).unwrap();
    assert_eq!(p, &x1.scale(&Scalar::ratio(1, 2)) - &x2.scale(&Scalar::i()));
    assert_eq!(print_polynomial(&p, &xy), "1/2*x1 - I*x2");
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> Scalar {
    let re = Scalar::ratio(rng.random_range(-9..=9), rng.random_range(1..=7));
    if rng.random_bool(0.3) {
        let im = Scalar::ratio(rng.random_range(-9..=9), rng.random_range(1..=7));
        &re + &(&im * &Scalar::i())
    } else {
        re
    }
}

#[test]
fn print_then_parse_is_the_identity() {
    let ns = names(&["x", "y_1", "zb"]);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let terms: Vec<(MultiIndex, Scalar)> = (0..rng.random_range(0..6))
            .map(|_| {
                let m =
                    MultiIndex::from_slice(&[rng.random_range(0..4), rng.random_range(0..3), rng.random_range(0..3)]);
                (m, random_gaussian(&mut rng))
            })
            .collect();
        let p = BasePolynomial::from_terms(3, terms);
        let text = print_polynomial(&p, &ns);
        assert_eq!(parse_expression(&text, &ns, true).unwrap(), p, "{text}");
    }
}

#[test]
fn order_precedence() {
    assert_eq!(resolve_order(Some(3), Some(4), Some("5")).unwrap(), 3);
    assert_eq!(resolve_order(None, Some(4), Some("5")).unwrap(), 4);
    assert_eq!(resolve_order(None, None, Some("5")).unwrap(), 5);
    assert_eq!(resolve_order(None, None, None).unwrap(), 6);
    assert!(resolve_order(None, None, Some("five")).is_err());
    assert!(resolve_order(Some(0), None, None).is_err());
}

#[test]
fn flat_demo_reports_the_half_shift() {
    let out = run_demo("flat-symplectic", &RunOptions { order: Some(3), ..Default::default() });
    assert_eq!(out.exit_code, 0);
    assert_eq!(out.report["outputs"]["source"]["x1"]["display"], "x1 + 1/2*xi_x2");
    assert_eq!(out.report["outputs"]["target"]["x1"]["display"], "x1 - 1/2*xi_x2");
    assert_eq!(out.report["outputs"]["lifts"]["x1"]["value"]["display"], "x1 - xi_x2");
}

#[test]
fn series_serialization_is_canonical() {
    let opts = RunOptions { order: Some(2), functions: vec!["g".into()], ..Default::default() };
    let out = run(fedosov_cli::Command::Lift, "flat", FLAT, &opts);
    let value = &out.report["outputs"]["lifts"]["g"]["value"];
    let expected = r#"{"display":"x1*x2 + x1*xi_x1 - x2*xi_x2 - xi_x1*xi_x2","order":2,"terms":[{"coeff":"1/1","x_multi_index":[1,1],"xi_multi_index":[0,0]},{"coeff":"1/1","x_multi_index":[1,0],"xi_multi_index":[1,0]},{"coeff":"-1/1","x_multi_index":[0,1],"xi_multi_index":[0,1]},{"coeff":"-1/1","x_multi_index":[0,0],"xi_multi_index":[1,1]}]}"#;
    assert_eq!(serde_json::to_string(value).unwrap(), expected);

    // The flat lift is a ring morphism, so this is (x1 - xi_x2)(x2 + xi_x1).
    let opts = RunOptions { order: Some(2), functions: vec!["x2".into()], ..Default::default() };
    let spec = r#"{"coordinates":["x1","x2"],"poisson":[["0","1"],["-1","0"]],"functions":{"x2":"x2"}}"#;
    let out = run(fedosov_cli::Command::Lift, "flat", spec, &opts);
    assert_eq!(out.report["outputs"]["lifts"]["x2"]["value"]["display"], "x2 + xi_x1");
}

#[test]
fn exit_codes_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write_spec(&dir, "flat.json", FLAT);
    let broken = write_spec(
        &dir,
        "broken.json",
        r#"{"coordinates":["x1","x2","x3"],"poisson":[["0","x1","0"],["-x1","0","x2"],["0","-x2","0"]]}"#,
    );
    let typo = write_spec(&dir, "typo.json", r#"{"coordinates":["x1","x2"],"poisson":[["0","1"],["-1","0 +"]]}"#);
    let malformed = write_spec(&dir, "malformed.json", "{ not json");

    assert_eq!(bin().args(["validate", &flat]).output().unwrap().status.code(), Some(0));
    assert_eq!(bin().args(["check", &flat, "--order", "3"]).output().unwrap().status.code(), Some(0));

    let out = bin().args(["validate", &broken]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let jacobi = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "poisson jacobi").unwrap();
    assert_eq!(jacobi["residuals"][0]["value"]["display"], "x1");
    assert_eq!(bin().args(["solve", &broken, "--order", "2"]).output().unwrap().status.code(), Some(1));

    let out = bin().args(["solve", &typo]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["position"], 3);
    assert_eq!(bin().args(["solve", &malformed]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["demo", "no-such-demo"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["lift", &flat, "--function", "h"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["solve", "/nonexistent/spec.json"]).output().unwrap().status.code(), Some(2));

    let out = bin().args(["demo", "su2-obstruction"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let report = json(&out);
    assert_eq!(report["outputs"]["obstruction"]["status"], "INFEASIBLE");
    assert_eq!(report["outputs"]["obstruction"]["verified"], true);
}

#[test]
fn order_comes_from_the_environment_when_unset_elsewhere() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write_spec(&dir, "flat.json", FLAT);
    let out = bin().args(["solve", &flat]).env(fedosov_cli::ORDER_ENV, "3").output().unwrap();
    assert_eq!(json(&out)["order"], 3);
    let out = bin().args(["solve", &flat, "--order", "2"]).env(fedosov_cli::ORDER_ENV, "3").output().unwrap();
    assert_eq!(json(&out)["order"], 2);
    let out = bin().args(["solve", &flat]).env(fedosov_cli::ORDER_ENV, "x").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_quiet_and_timing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write_spec(&dir, "flat.json", FLAT);
    let target = dir.path().join("out.json");
    let out = bin().args(["groupoid", &flat, "--order", "3", "--quiet", "--output"]).arg(&target).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(written["outputs"]["maps"]["identity"], true);
    assert!(written.get("timing_ms").is_none());

    let out = bin().args(["lift", &flat, "--order", "2", "--function", "f", "--timing"]).output().unwrap();
    let report = json(&out);
    assert!(report["timing_ms"]["solve"].is_number());
    let lifts = report["outputs"]["lifts"].as_object().unwrap();
    assert_eq!(lifts.keys().collect::<Vec<_>>(), ["f"]);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let run_with =
        |threads: &str| bin().args(["demo", "aff1", "--order", "4", "--threads", threads]).output().unwrap().stdout;
    let a = run_with("1");
    let b = run_with("4");
    let c = run_with("4");
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(b, c);
}

#[test]
fn kahler_specs_need_ordered_coordinates() {
    let spec = r#"{"coordinates":["zb","z"],"field":"gaussian",
        "connection":{"type":"kahler","metric":[["1"]],"holomorphic":["z"],"antiholomorphic":["zb"]}}"#;
    assert_eq!(run(fedosov_cli::Command::Validate, "k", spec, &RunOptions::default()).exit_code, 2);
    let complex_in_rational = r#"{"coordinates":["x1","x2"],"poisson":[["0","I"],["-I","0"]]}"#;
    let out = run(fedosov_cli::Command::Validate, "c", complex_in_rational, &RunOptions::default());
    assert_eq!(out.exit_code, 2);
    assert_eq!(out.report["error"]["kind"], "parse");
}

#[test]
fn non_closed_kahler_form_fails_validation() {
    let spec = r#"{"coordinates":["z1","z2","zb1","zb2"],"field":"gaussian",
        "connection":{"type":"kahler","metric":[["1 + z2","0"],["0","1"]],"holomorphic":["z1","z2"],"antiholomorphic":["zb1","zb2"]},
        "pq":"kahler"}"#;
    let out = run(fedosov_cli::Command::Validate, "k", spec, &RunOptions::default());
    assert_eq!(out.exit_code, 1, "{}", out.text());
}
