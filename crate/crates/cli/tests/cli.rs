use std::path::Path;
use std::process::{Command, Output};

use conewalk::io::{parse_json, poly_from_json, poly_to_json, to_canonical_string};
use conewalk::{BigRational, Poly, Quad, Scalar};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conewalk")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_out(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

const MU2: &str = r#"{"order":2,"mu":[{"k":0,"l":0,"v":"1"},{"k":1,"l":0,"v":"0"},{"k":0,"l":1,"v":"0"},{"k":2,"l":0,"v":"1"},{"k":1,"l":1,"v":"0"},{"k":0,"l":2,"v":"1"}]}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn matrix_m31() {
    let o = run(&["matrix", "--n", "3", "--b", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "{\"backend\":\"rational\",\"boundary\":{\"b\":\"1\",\"kind\":\"slope\"},\"kernel_dimension\":0,\"n\":3,\
\"rows\":[[\"3\",\"0\",\"1\",\"0\"],[\"0\",\"1\",\"0\",\"3\"],[\"1\",\"0\",\"0\",\"0\"],[\"1\",\"1\",\"1\",\"1\"]],\"theta\":\"-2\"}\n"
    );
}

#[test]
fn matrix_resonant_kernel_and_solve() {
    let v = json_out(&["matrix", "--n", "4", "--b", "1"]);
    assert_eq!(v["kernel_dimension"], 1);
    let o = run(&["matrix", "--n", "4", "--b", "1", "--solve", "1,0,0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular-angle"));
    let v = json_out(&["matrix", "--n", "3", "--b", "1", "--solve", "1,2,0,0"]);
    assert_eq!(v["solution"].as_array().unwrap().len(), 4);
}

#[test]
fn harmonic_m2_is_2x1x2() {
    let dir = tempfile::tempdir().unwrap();
    let mu = write(dir.path(), "mu.json", MU2);
    let v = json_out(&["harmonic", "--m", "2", "--moments", &mu]);
    let h: Poly<BigRational> = poly_from_json(&v["h"], "h").unwrap();
    assert_eq!(h, Poly::monomial(1, 1, BigRational::from_int(2)));
    assert_eq!(v["boundary_ok"], true);
}

#[test]
fn harmonic_from_walk_round_trips() {
    let out = run(&["harmonic", "--m", "3", "--walk", "builtin:3", "--method", "alt"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["backend"], "quad:3");
    let h: Poly<Quad<3>> = poly_from_json(&v["h"], "h").unwrap();
    assert_eq!(to_canonical_string(&poly_to_json(&h), false), to_canonical_string(&v["h"], false));
    let descent = json_out(&["harmonic", "--m", "3", "--walk", "builtin:3"]);
    assert_eq!(descent["h"], v["h"]);
}

#[test]
fn exit_moment_value() {
    let v = json_out(&["exit-moments", "--k", "1", "--m", "3", "--at", "1,1"]);
    let val = Quad::<3>::parse_scalar(v["value"].as_str().unwrap()).unwrap();
    assert_eq!(val, Quad::<3>::sqrt_d() - Quad::<3>::one());
    let o = run(&["exit-moments", "--k", "1", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("moment-not-finite"));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json").display().to_string();
    let b = dir.path().join("b.json").display().to_string();
    for out in [&a, &b] {
        let o = run(&["transform", "--walk", "builtin:6", "--format", "pretty", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(parse_json(&std::fs::read_to_string(&a).unwrap(), "a").is_ok());
}

#[test]
fn parse_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"atoms\": [\n  {\"dy\": [1, 0], \"p\": \"1/2\"},\n");
    let o = run(&["transform", "--walk", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json") && err.contains("line 3"), "{err}");
    let field = write(dir.path(), "field.json", r#"{"atoms":[{"dy":[1,0],"p":"1/4"},{"dy":[-1,0]}]}"#);
    let err = String::from_utf8_lossy(&run(&["transform", "--walk", &field]).stderr).to_string();
    assert!(err.contains("atoms[1].p"), "{err}");
    assert_eq!(run(&["matrix", "--n", "3", "--b", "1", "--backend", "quad:7"]).status.code(), Some(2));
}

#[test]
fn verify_and_alt_eliminate() {
    let v = json_out(&["verify", "--walk", "builtin:4", "--radius", "20"]);
    assert_eq!(v["pass"], true);
    let v = json_out(&["alt-eliminate", "--j", "1", "--k", "0", "--m", "4"]);
    let f: Poly<BigRational> = poly_from_json(&v["F"], "F").unwrap();
    assert_eq!(f.laplacian(), Poly::monomial(1, 0, BigRational::from_int(1)));
    let o = run(&["alt-eliminate", "--j", "1", "--k", "1", "--m", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--walk", "builtin:3", "--paths", "20000", "--seed", "11", "--check", "tau-mean,harmonicity"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
    let o = run(&["simulate", "--walk", "builtin:3", "--start", "0,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("start-not-interior"));
}

#[test]
fn self_test_and_fault_injection() {
    let o = run(&["self-test"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["self-test", "--float-bits", "64"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["self-test", "--inject-fault", "u-poly"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL [quad:3] theta-identity"));
}
