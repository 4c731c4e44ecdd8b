use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tropibayes"));
    c.env_remove("TROPIBAYES_THREADS");
    c
}

fn model(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "models", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

const F_EQ_G: &str = r#"{
  "toric": {"rays": [[1], [-1]], "max_cones": [[0], [1]]},
  "prior": {"num": [["1", [1, 0]], ["1", [0, 1]]], "den": [["1", [1, 0]], ["1", [0, 1]]]}
}"#;

#[test]
fn trop_cubic() {
    let v = json_ok(&["trop", "--model", &model("cubic.json")]);
    assert_eq!(v["trop_total"], "3/2");
}

#[test]
fn trop_pentagon_with_report() {
    let v = json_ok(&["trop", "--model", &model("pentagon.json"), "--sector-report"]);
    assert_eq!(v["trop_total"], "37/4");
    assert_eq!(v["M1"], "1/24");
    assert_eq!(v["M2"], "10/7");
    assert_eq!(v["sector_report"].as_array().unwrap().len(), v["sectors"].as_u64().unwrap() as usize);
}

#[test]
fn trop_coin() {
    let v = json_ok(&["trop", "--model", "coin(2)", "--u", "2,1,2"]);
    assert_eq!(v["trop_total"], "40/21");
    assert_eq!(v["sectors"], 32);
}

#[test]
fn check_pentagon_converges() {
    let v = json_ok(&["check", "--model", &model("pentagon.json")]);
    assert_eq!(v["homogeneous"], true);
    assert_eq!(v["convergent"], true);
    assert_eq!(v["newton_dims"], serde_json::json!([2, 2]));
}

#[test]
fn f_equal_g_diverges() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("flat.json");
    std::fs::write(&p, F_EQ_G).unwrap();
    let p = p.to_str().unwrap();
    let v = json_ok(&["check", "--model", p]);
    assert_eq!(v["convergent"], false);
    let out = run(&["trop", "--model", p]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_json_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"toric\": {\"rays\": [[1], [-1]],\n  \"max_cones\": ").unwrap();
    let out = run(&["check", "--model", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn bad_coefficient_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("coef.json");
    std::fs::write(&p, F_EQ_G.replacen("\"1\"", "\"-1\"", 1)).unwrap();
    let out = run(&["check", "--model", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prior.num"));
}

#[test]
fn unknown_model_and_missing_data() {
    assert_eq!(run(&["trop", "--model", "nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["ml", "--model", "coin(2)"]).status.code(), Some(2));
    assert_eq!(run(&["ml", "--model", "coin(2)", "--u", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["integrate", "--model", "coin(2)", "--seed", "x"]).status.code(), Some(2));
}

#[test]
fn ml_coin_mc() {
    let v = json_ok(&["ml", "--model", "coin(2)", "--u", "2,1,2", "--method", "mc", "--N", "50000"]);
    let exact = 2267.0 / 1559250.0;
    assert!((num(&v["value"]) - exact).abs() / exact <= 0.10, "{v}");
    assert_eq!(v["seed"], 0);
    assert_eq!(v["multinomial_included"], false);
}

#[test]
fn ml_multinomial_flag() {
    let base = json_ok(&["ml", "--model", "coin(2)", "--u", "2,1,2", "--method", "cubature"]);
    let with =
        json_ok(&["ml", "--model", "coin(2)", "--u", "2,1,2", "--method", "cubature", "--include-multinomial"]);
    let d = num(&with["log_value"]) - num(&base["log_value"]);
    assert!((d - 30f64.ln()).abs() < 1e-12);
}

#[test]
fn bayes_factor_of_toric_pair() {
    let v = json_ok(&[
        "bf",
        "--model",
        "pentagon-toric(2,3,5,7,11,13)",
        "--against",
        "pentagon-toric(32,16,8,4,2,1)",
        "--u",
        "1,2,4,8,16,32",
        "--method",
        "cubature",
        "--nodes",
        "64",
    ]);
    let k = num(&v["k"]);
    assert!((19.0..=23.0).contains(&k), "K = {k}");
}

#[test]
fn integrate_is_seed_reproducible_across_threads() {
    let a = json_ok(&["integrate", "--model", &model("cubic.json"), "--N", "20000", "--threads", "1"]);
    let b = bin()
        .args(["integrate", "--model", &model("cubic.json"), "--N", "20000"])
        .env("TROPIBAYES_THREADS", "3")
        .output()
        .unwrap();
    let b: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(a["log_value"], b["log_value"]);
    assert_eq!(b["threads"], 3);
    let exact = (6.0 * 3f64.ln() - 5f64.ln()) / 56.0;
    assert!((num(&a["I_N"]) - exact).abs() < 3.0 * num(&a["stderr"]) + 1e-12);
}

#[test]
fn empty_sample_has_header() {
    let out = run(&["sample", "--model", &model("pentagon.json"), "--N", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "index,sector,accepted,log_h,log_x0,log_x1,log_x2,log_x3,log_x4\n");
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(r.headers().unwrap().len(), 9);
    assert_eq!(r.records().count(), 0);
}

#[test]
fn sample_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let v = json_ok(&["sample", "--model", &model("pentagon.json"), "--N", "20000", "--output", p.to_str().unwrap()]);
    let rate = num(&v["acceptance_rate"]);
    assert!((0.19..=0.25).contains(&rate), "{rate}");
    let mut r = csv::Reader::from_path(&p).unwrap();
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 20000);
    let accepted = rows.iter().filter(|x| &x[2] == "1").count();
    assert_eq!(accepted as u64, v["accepted"].as_u64().unwrap());
}

#[test]
fn tropical_draws_all_accepted() {
    let out = run(&["sample", "--model", &model("cubic.json"), "--N", "100", "--tropical"]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_reader(&out.stdout[..]);
    assert!(r.records().all(|x| &x.unwrap()[2] == "1"));
}

#[test]
fn posterior_zero_acceptance_warns() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.csv");
    let out = run(&["posterior", "--model", "coin(2)", "--u", "2,1,2", "--N", "2000", "--output", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["accepted"], 0);
    assert!(v["warning"].is_string());
}

#[test]
fn floats_use_seventeen_digits() {
    let out = run(&["integrate", "--model", &model("cubic.json"), "--method", "cubature"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"value\"")).unwrap();
    let mantissa = line.split(':').nth(1).unwrap().trim().trim_end_matches(',').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17, "{line}");
}

#[test]
fn builtin_roundtrip_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = tropibayes::ModelSpec::builtin("pentagon-wachspress").unwrap();
    let p = dir.path().join("w.json");
    std::fs::write(&p, serde_json::to_string(&m.to_json()).unwrap()).unwrap();
    let a = json_ok(&["ml", "--model", "pentagon-wachspress", "--u", "2,3,5,7,11", "--method", "cubature"]);
    let b = json_ok(&["ml", "--model", p.to_str().unwrap(), "--u", "2,3,5,7,11", "--method", "cubature"]);
    assert_eq!(a["log_value"], b["log_value"]);
}
