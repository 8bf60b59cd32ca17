use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

use conepersist::arrangement::{AxisGrid, CellComplex};
use conepersist::cone::ConeSpec;
use conepersist::doc::Document;
use conepersist::persist::{indicator_module, point_module, principal_module, ArrModule};
use conepersist::rat::rvec;
use conepersist::sites::beta_star;

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_conepersist")).args(args).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("bad report {text:?}: {e}"));
    (out.status.code().unwrap(), report)
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn principal(x: i64) -> ArrModule {
    principal_module(&CellComplex::line(&rvec(&[0])), &rvec(&[x]), 2).unwrap()
}

fn rays(births: &[&str]) -> String {
    serde_json::json!({"version": "1", "kind": "ray-sheaf", "payload": {"births": births}}).to_string()
}

#[test]
fn validate_reports_kind() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &Document::arr_module(&principal(0)).to_json());
    let (code, r) = run(&["validate", s(&p)]);
    assert_eq!(code, 0);
    assert_eq!(r["kind"], "arr-module");
    assert_eq!(r["valid"], true);
}

#[test]
fn validate_rejects_a_non_commuting_square() {
    let c = CellComplex::new(
        ConeSpec::nonpositive_orthant(2),
        vec![AxisGrid::new(rvec(&[0])).unwrap(), AxisGrid::new(rvec(&[0])).unwrap()],
    )
    .unwrap();
    let m = indicator_module(c, 2, |_| true).unwrap();
    let mut v: Value = serde_json::from_str(&Document::arr_module(&m).to_json()).unwrap();
    v["payload"]["maps"][0]["matrix"] = serde_json::json!([[0]]);
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", &v.to_string());
    let (code, r) = run(&["validate", s(&p)]);
    assert_eq!(code, 3);
    assert_eq!(r["error"], "invariant");
}

#[test]
fn parse_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let text = Document::arr_module(&principal(0)).to_json().replacen("\"0\"", "\"1/0\"", 1);
    let p = write(&dir, "zero-den.json", &text);
    assert_eq!(run(&["validate", s(&p)]).0, 2);
    assert_eq!(run(&["validate", s(&dir.path().join("missing.json"))]).0, 2);
    assert_eq!(run(&["check", "no-such-suite"]).0, 2);
}

#[test]
fn field_flag_must_match() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &Document::arr_module(&principal(0)).to_json());
    assert_eq!(run(&["--field", "2", "validate", s(&p)]).0, 0);
    assert_eq!(run(&["--field", "3", "validate", s(&p)]).0, 4);
}

#[test]
fn beta_star_kills_point_modules() {
    let dir = TempDir::new().unwrap();
    let pt = point_module(&CellComplex::line(&rvec(&[0])), &rvec(&[0]), 2).unwrap();
    let input = write(&dir, "pt.json", &Document::arr_module(&pt).to_json());
    let out = dir.path().join("out.json");
    let (code, r) = run(&["functor", "beta-star", s(&input), s(&out)]);
    assert_eq!(code, 0);
    assert_eq!(r["zero"], true);
    assert_eq!(r["kind"], "gamma-module");
    assert_eq!(run(&["validate", s(&out)]).0, 0);
}

#[test]
fn alpha_star_round_trips_through_beta_star() {
    let dir = TempDir::new().unwrap();
    let g = Document::gamma_module(&beta_star(&principal(1)));
    let input = write(&dir, "g.json", &g.to_json());
    let (mid, back) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert_eq!(run(&["functor", "alpha-star", s(&input), s(&mid)]).0, 0);
    assert_eq!(run(&["functor", "beta-star", s(&mid), s(&back)]).0, 0);
    let again = Document::from_json(&std::fs::read_to_string(&back).unwrap()).unwrap();
    assert_eq!(again, g);

    let arr = write(&dir, "arr.json", &Document::arr_module(&principal(1)).to_json());
    let (code, r) = run(&["functor", "alpha-star", s(&arr), s(&mid)]);
    assert_eq!(code, 4);
    assert_eq!(r["error"], "domain");
}

#[test]
fn interleaving_distance_of_translates() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &Document::arr_module(&principal(0)).to_json());
    let b = write(&dir, "b.json", &Document::arr_module(&principal(3)).to_json());
    let w = dir.path().join("w.json");
    let (code, r) = run(&["distance", "interleaving", s(&a), s(&b), "--witness", s(&w)]);
    assert_eq!(code, 0);
    assert_eq!(r["value"], "3");
    assert_eq!(r["attained"], true);
    let (vcode, vr) = run(&["validate", s(&w)]);
    assert_eq!((vcode, vr["kind"].as_str()), (0, Some("witness")));

    let (_, half) = run(&["distance", "interleaving", s(&a), s(&b), "--direction", "2"]);
    assert_eq!(half["value"], "3/2");
    let (_, tol) = run(&["distance", "interleaving", s(&a), s(&b), "--tol", "1/1024"]);
    let br = tol["bracket"].as_array().unwrap();
    let lo: f64 = eval(br[0].as_str().unwrap());
    let hi: f64 = eval(br[1].as_str().unwrap());
    assert!(lo <= 3.0 && 3.0 <= hi && hi - lo <= 1.0 / 1024.0);
}

fn eval(r: &str) -> f64 {
    match r.split_once('/') {
        Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
        None => r.parse().unwrap(),
    }
}

#[test]
fn ephemeral_modules_sit_at_distance_zero_unattained() {
    let dir = TempDir::new().unwrap();
    let c = CellComplex::line(&rvec(&[0]));
    let pt = write(&dir, "pt.json", &Document::arr_module(&point_module(&c, &rvec(&[0]), 2).unwrap()).to_json());
    let zero = write(&dir, "z.json", &Document::arr_module(&ArrModule::zero(c, 2)).to_json());
    let (code, r) = run(&["distance", "interleaving", s(&pt), s(&zero)]);
    assert_eq!(code, 0);
    assert_eq!(r["value"], "0");
    assert_eq!(r["attained"], false);
}

#[test]
fn convolution_distance_of_rays() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &rays(&["0"]));
    let b = write(&dir, "b.json", &rays(&["3"]));
    let (code, r) = run(&["distance", "convolution", s(&a), s(&b)]);
    assert_eq!(code, 0);
    assert_eq!(r["value"], "3");
    let c = write(&dir, "c.json", &rays(&["0", "1"]));
    assert_eq!(run(&["distance", "convolution", s(&a), s(&c)]).1["value"], "inf");
}

#[test]
fn directions_outside_the_antipode_are_rejected() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &Document::arr_module(&principal(0)).to_json());
    let (code, r) = run(&["distance", "interleaving", s(&a), s(&a), "--direction", "-1"]);
    assert_eq!(code, 4);
    assert_eq!(r["error"], "domain");
    let rs = write(&dir, "r.json", &rays(&["0"]));
    assert_eq!(run(&["distance", "interleaving", s(&rs), s(&rs)]).0, 4);
}

#[test]
fn check_runs_are_reproducible() {
    let (code, par) = run(&["check", "gauge", "--seed", "5", "--count", "30"]);
    assert_eq!(code, 0);
    assert_eq!(par["passed"], 30);
    let (_, seq) = run(&["check", "gauge", "--seed", "5", "--count", "30", "--sequential"]);
    assert_eq!(par, seq);
    let (code, one) = run(&["check", "decision", "--case", "17"]);
    assert_eq!(code, 0);
    assert_eq!(one["pass"], true);
}
