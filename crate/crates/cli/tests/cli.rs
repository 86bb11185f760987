use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn smithpow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smithpow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("smithpow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn snf_of_identity_file() {
    let f = temp_file("id.txt", "3 3\n1 0 0\n0 1 0\n0 0 1\n");
    let v = json(&smithpow(&["snf", "--matrix", f.to_str().unwrap()]));
    assert_eq!(v["diag"], serde_json::json!(["1", "1", "1"]));
    assert_eq!(v["rank"], 3);
}

#[test]
fn snf_of_counterexample_matrix() {
    let f = temp_file("m4.txt", "4 4\n0 0 256 0\n1 0 0 0\n0 1 0 0\n0 0 0 2\n");
    let v = json(&smithpow(&["snf", "--matrix", f.to_str().unwrap()]));
    assert_eq!(v["diag"], serde_json::json!(["1", "1", "2", "256"]));
}

#[test]
fn snf_witnesses_are_emitted() {
    let v = json(&smithpow(&[
        "snf",
        "--family",
        "jordan",
        "--param",
        "p=3",
        "--witnesses",
    ]));
    assert_eq!(v["diag"], serde_json::json!(["1", "9"]));
    assert!(v["u"]["entries"].is_array());
    assert!(v["v"]["entries"].is_array());
}

#[test]
fn malformed_file_names_the_line() {
    let f = temp_file("bad.txt", "2 2\n1 2\n3 x\n");
    let out = smithpow(&["snf", "--matrix", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn json_matrix_input() {
    let f = temp_file(
        "m.json",
        r#"{"rows": 2, "cols": 2, "entries": [["2", "0"], ["0", "6"]]}"#,
    );
    let v = json(&smithpow(&["snf", "--matrix", f.to_str().unwrap()]));
    assert_eq!(v["diag"], serde_json::json!(["2", "6"]));
}

#[test]
fn trace_jordan_period() {
    let v = json(&smithpow(&[
        "trace",
        "--family",
        "jordan",
        "--param",
        "p=2",
        "--horizon",
        "40",
    ]));
    assert_eq!(v["period"]["T"], 2);
    assert_eq!(v["period"]["status"], "CONFIRMED_WINDOW");
    assert_eq!(v["smith"].as_array().unwrap().len(), 41);
    assert_eq!(v["D"].as_array().unwrap().len(), 40);
    assert_eq!(v["per_prime"][0]["p"], 2);
}

#[test]
fn trace_counterexample_period() {
    let v = json(&smithpow(&[
        "trace",
        "--family",
        "bruner",
        "--param",
        "m=4",
        "--horizon",
        "60",
    ]));
    assert_eq!(v["period"]["n0"], 3);
    assert_eq!(v["period"]["T"], 3);
}

#[test]
fn horizon_too_small() {
    let out = smithpow(&[
        "trace",
        "--family",
        "jordan",
        "--param",
        "p=2",
        "--horizon",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("horizon too small"));
}

#[test]
fn trace_csv_rows() {
    let out = smithpow(&[
        "trace",
        "--family",
        "jordan",
        "--param",
        "p=3",
        "--horizon",
        "4",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,s1,s2,d1,d2,nu_3");
    assert_eq!(lines[4], "3,27,27,1,9,3");
    assert_eq!(lines[5], "4,27,243,,,3");
}

#[test]
fn nilpotent_trace_omits_prime_sections() {
    let f = temp_file("nil.txt", "2 2\n0 1\n0 0\n");
    let out = smithpow(&["trace", "--matrix", f.to_str().unwrap(), "--horizon", "4"]);
    let v = json(&out);
    assert!(v["per_prime"].as_array().unwrap().is_empty());
    assert!(stderr(&out).contains("nilpotent"));

    let out = smithpow(&["valuation", "--matrix", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nilpotent"));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "trace",
        "--family",
        "random",
        "--param",
        "size=4",
        "--seed",
        "11",
        "--horizon",
        "30",
    ];
    let a = smithpow(&args);
    let b = smithpow(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gcd_seq_values() {
    let v = json(&smithpow(&[
        "gcd-seq",
        "--family",
        "jordan",
        "--param",
        "p=3",
        "--horizon",
        "8",
    ]));
    let g: Vec<&str> = v["g"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert_eq!(g, ["1", "3", "9", "1", "3", "9", "1", "3", "9"]);
}

#[test]
fn valuation_slope() {
    let v = json(&smithpow(&[
        "valuation",
        "--family",
        "jordan",
        "--param",
        "p=2",
        "--horizon",
        "20",
    ]));
    assert_eq!(v[0]["p"], 2);
    assert_eq!(v[0]["a"], "1");
    assert_eq!(v[0]["h_period"]["T"], 2);
}

#[test]
fn newton_of_polynomial() {
    let v = json(&smithpow(&["newton", "--poly=-4,0,1", "--primes", "2"]));
    assert_eq!(v["polygons"][0]["slopes"][0]["valuation"], "1");
    assert_eq!(v["polygons"][0]["slopes"][0]["multiplicity"], 2);
}

#[test]
fn newton_of_matrix() {
    let v = json(&smithpow(&[
        "newton", "--family", "bruner", "--param", "m=4",
    ]));
    let slopes = &v["polygons"][0]["slopes"];
    assert_eq!(slopes[0]["valuation"], "8/3");
    assert_eq!(slopes[0]["multiplicity"], 3);
    assert_eq!(slopes[1]["valuation"], "1");
}

#[test]
fn probe_period_divides_bound() {
    let v = json(&smithpow(&[
        "probe", "--coeffs", "1/4,0,1", "--c", "3/2", "--prime", "2",
    ]));
    let bound = v["bound"].as_u64().unwrap();
    let t = v["period"]["T"].as_u64().unwrap();
    assert_eq!(bound % t, 0);
    assert_eq!(v["theta"], "4");
}

#[test]
fn candidates_list() {
    let v = json(&smithpow(&[
        "candidates",
        "--prime",
        "3",
        "--max-f",
        "1",
        "--max-l",
        "2",
    ]));
    assert_eq!(v, serde_json::json!([2, 6, 18]));
}

#[test]
fn generate_round_trips_through_matrix_flag() {
    let out = smithpow(&["generate", "--family", "bruner", "--param", "m=3"]);
    let v = json(&out);
    assert_eq!(v["family"], "bruner");
    assert_eq!(v["params"]["m"], 3);
    let f = temp_file("gen.json", &String::from_utf8(out.stdout).unwrap());
    let s = json(&smithpow(&["snf", "--matrix", f.to_str().unwrap()]));
    assert_eq!(s["diag"], serde_json::json!(["1", "2", "64"]));
}

#[test]
fn generate_random_is_seeded() {
    let a = smithpow(&[
        "generate", "--family", "random", "--param", "size=3", "--seed", "9",
    ]);
    let b = smithpow(&[
        "generate", "--family", "random", "--param", "size=3", "--seed", "9",
    ]);
    let c = smithpow(&[
        "generate", "--family", "random", "--param", "size=3", "--seed", "10",
    ]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn unknown_family_and_params() {
    let out = smithpow(&["snf", "--family", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = smithpow(&["snf", "--family", "jordan", "--param", "q=2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = smithpow(&["snf", "--family", "jordan", "--param", "p=4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not prime"));
}

#[test]
fn missing_source_is_a_usage_error() {
    assert_eq!(smithpow(&["snf"]).status.code(), Some(2));
}

#[test]
fn selftest_single_suite() {
    let out = smithpow(&["selftest", "--suite", "kummer"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("[PASS] 8 kummer"));
    assert!(!text.contains("jordan"));
}

#[test]
fn selftest_unknown_suite() {
    let out = smithpow(&["selftest", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let path = temp_file("out.json", "");
    let out = smithpow(&[
        "candidates",
        "--prime",
        "2",
        "--max-f",
        "1",
        "--max-l",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v, serde_json::json!([1, 2]));
}
