use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use torfan::io::{FanFile, Report};
use torfan::variety::{FaceLocalizationCertificate, SeparatednessCertificate};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn torfan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torfan"))
        .args(args)
        .env_remove("TORFAN_SEARCH_CEILING")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(args: &[&str]) -> (i32, Report) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = torfan(&all);
    let r: Report = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (code(&o), r)
}

#[test]
fn validate_fan_exit_codes() {
    let o = torfan(&["validate-fan", &fixture("quadrant.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("validate-fan: valid fan"));

    let (c, r) = report(&["validate-fan", &fixture("overlapping.json")]);
    assert_eq!(c, 1);
    assert!(!r.affirmative);
    assert_eq!(r.diagnostics["kind"], "bad_intersection");
    assert_eq!(r.diagnostics["cones"].as_array().unwrap().len(), 2);

    let o = torfan(&["validate-fan", &fixture("truncated.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = torfan(&["validate-fan", &fixture("missing.json")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn no_auto_close_reports_missing_faces() {
    let (c, r) = report(&["--no-auto-close", "validate-fan", &fixture("quadrant.json")]);
    assert_eq!(c, 1);
    assert_eq!(r.diagnostics["kind"], "missing_face");
}

#[test]
fn has_semigroup_verdicts() {
    let (c, r) = report(&["has-semigroup", &fixture("quadrant.json")]);
    assert_eq!(c, 0);
    assert!(r.certificates["generating_cone"].is_object());

    let (c, r) = report(&["has-semigroup", &fixture("p1.json")]);
    assert_eq!(c, 1);
    assert_eq!(r.diagnostics["message"], "two nondegenerate cones");

    let o = torfan(&["has-semigroup", &fixture("ray_rank2.json")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn reconstruct_writes_a_valid_fan_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fan.json");
    let out_s = out.to_string_lossy().into_owned();
    let o = torfan(&["reconstruct", &fixture("p1_atlas.json"), "-o", &out_s]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));

    let written: FanFile = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let expected: FanFile = serde_json::from_str(&std::fs::read_to_string(fixture("p1.json")).unwrap()).unwrap();
    assert_eq!(written.to_fan(false).unwrap().unwrap(), expected.to_fan(false).unwrap().unwrap());

    let (c, r) = report(&["validate-fan", &out_s]);
    assert_eq!(c, 0);
    let again: FanFile = serde_json::from_value(r.certificates["fan"].clone()).unwrap();
    assert_eq!(again, written);
}

#[test]
fn reconstruct_rejects_pathologies() {
    let (c, r) = report(&["reconstruct", &fixture("doubled_line.json")]);
    assert_eq!(c, 1);
    assert_eq!(r.verdict, "not separated");
    assert_eq!(r.diagnostics["kind"], "non_separated");

    let (c, r) = report(&["reconstruct", &fixture("cusp.json")]);
    assert_eq!(c, 1);
    assert_eq!(r.verdict, "not normal");
    assert_eq!(r.diagnostics["witness"], serde_json::json!(["1"]));
}

#[test]
fn query_commands() {
    let (c, r) = report(&["dual", "1,0;0,1"]);
    assert_eq!(c, 0);
    assert_eq!(r.certificates["dual"]["rays"], serde_json::json!([["0", "1"], ["1", "0"]]));

    let (c, r) = report(&["hilbert", &fixture("a2_cone.json")]);
    assert_eq!(c, 0);
    assert_eq!(r.certificates["hilbert"].as_array().unwrap().len(), 3);

    let (c, r) = report(&["faces", "1,0;0,1"]);
    assert_eq!(c, 0);
    assert_eq!(r.certificates["faces"].as_array().unwrap().len(), 4);

    let o = torfan(&["has-zero", "1,0"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("none"));
    assert_eq!(code(&torfan(&["has-zero", "1,0;0,1"])), 0);

    assert_eq!(code(&torfan(&["one-param", "1,0;0,1", "2,1"])), 0);
    assert_eq!(code(&torfan(&["one-param", "1,0;0,1", "-1,3"])), 1);

    assert_eq!(code(&torfan(&["has-zero", "1,0;-1,0"])), 2);
    assert_eq!(code(&torfan(&["dual", ""])), 2);
    assert_eq!(code(&torfan(&["dual", "", "--rank", "2"])), 0);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&torfan(&["frobnicate"])), 2);
    assert_eq!(code(&torfan(&[])), 2);
    assert_eq!(code(&torfan(&["dual", "1,x"])), 2);
    assert_eq!(code(&torfan(&["--help"])), 0);
}

#[test]
fn reports_are_deterministic_and_echo_the_seed() {
    let args = ["--seed", "-17", "separatedness", &fixture("p1.json")];
    let (c1, mut r1) = report(&args);
    let (c2, mut r2) = report(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(r1.seed, Some(-17));
    r1.timing_us = 0;
    r2.timing_us = 0;
    assert_eq!(r1, r2);
    assert!(stdout(&torfan(&args)).contains("seed -17"));
}

#[test]
fn certificates_verify_after_a_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let out_s = out.to_string_lossy().into_owned();
    let o = torfan(&["separatedness", &fixture("quadrant.json"), "-o", &out_s]);
    assert_eq!(code(&o), 0);
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let cert: SeparatednessCertificate = serde_json::from_value(r.certificates).unwrap();
    assert!(cert.verify());

    let (_, r) = report(&["separatedness", &fixture("p1.json")]);
    let mut cert: SeparatednessCertificate = serde_json::from_value(r.certificates.clone()).unwrap();
    assert!(!cert.pairs.is_empty());
    assert!(cert.verify());
    let d = &mut cert.pairs[0].decompositions[0];
    d.a = &d.a + &d.target;
    assert!(!cert.verify());

    let (c, r) = report(&["face-cert", "1,0;0,1", "1,0"]);
    assert_eq!(c, 0);
    let cert: FaceLocalizationCertificate = serde_json::from_value(r.certificates).unwrap();
    assert!(cert.verify());

    let (c, r) = report(&["face-cert", "1,0;0,1", "1,1"]);
    assert_eq!(c, 1);
    assert_eq!(r.certificates, Value::Null);
    assert_eq!(r.diagnostics["no_localizing_element_found"], true);
}

#[test]
fn search_ceiling_from_the_environment() {
    let run = |val: &str| {
        Command::new(env!("CARGO_BIN_EXE_torfan"))
            .args(["separatedness", &fixture("p1.json")])
            .env("TORFAN_SEARCH_CEILING", val)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    let o = run("0");
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("exhausted"));
    assert_eq!(code(&run("lots")), 2);
}
