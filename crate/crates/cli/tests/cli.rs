use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_bigint::BigInt;
use serde_json::Value;
use tempfile::TempDir;

fn maxsing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxsing")).args(args).env_remove("MAXSING_PRECISION_BITS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn gen_split4(dir: &Path, name: &str, steps: &str) -> String {
    let out = dir.join(name);
    let out = out.to_str().unwrap().to_owned();
    let o = maxsing(&["gen", "--family", "quadric", "--phi", "pow", "1/3", "--steps", steps, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn gen_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let trace = gen_split4(dir.path(), "t.json", "8");
    let report = dir.path().join("audit.json");
    let o = maxsing(&["verify", &trace, "--out", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    assert!(r["spanning"].is_object());
    assert!(r.get("bruteforce").is_none());
}

#[test]
fn grassmann_and_prodforms_round_trip() {
    let dir = TempDir::new().unwrap();
    for (fam, n, k) in [("grassmann", "4", "2"), ("prodforms", "2", "3")] {
        let out = dir.path().join(format!("{fam}.json"));
        let out = out.to_str().unwrap();
        let o = maxsing(&["gen", "--family", fam, "--n", n, "--k", k, "--phi", "pow", "1/3", "--steps", "6", "--seed", "7", "--out", out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(code(&maxsing(&["verify", out])), 0);
    }
}

#[test]
fn log3x_run_stops_on_budget_with_partial_trace() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.json");
    let out = out.to_str().unwrap();
    let o = maxsing(&["gen", "--family", "grassmann", "--n", "4", "--k", "2", "--phi", "log3x", "--steps", "10", "--seed", "7", "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("stopped after"));
    let t: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(t["status"]["state"], "budget_exhausted");
    // the prefix that was built still verifies
    assert_eq!(code(&maxsing(&["verify", out])), 0);
}

#[test]
fn invalid_configs_exit_1() {
    let o = maxsing(&["gen", "--family", "grassmann", "--n", "3", "--k", "2", "--phi", "pow", "3/2", "--steps", "5"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("3/2"));
    let o = maxsing(&["gen", "--family", "prodforms", "--n", "1", "--k", "2", "--phi", "log3x", "--steps", "5"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("n >= 2"));
    let o = maxsing(&["gen", "--family", "klinear", "--phi", "log3x", "--steps", "5"]);
    assert_eq!(code(&o), 1);
    let o = maxsing(&["gen", "--family", "quadric", "--phi", "log3x", "--steps", "1"]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&maxsing(&["frobnicate"])), 1);
    assert_eq!(code(&maxsing(&["--help"])), 0);
}

#[test]
fn tampered_trace_names_condition_d() {
    let dir = TempDir::new().unwrap();
    let trace = gen_split4(dir.path(), "t.json", "7");
    let mut t: Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    // double the recorded distance of step 4 -> 5
    let step = &mut t["entries"][3]["step"];
    let d = step["dist_sq"].as_str().unwrap().to_owned();
    let (num, den) = d.split_once('/').unwrap_or((&d, "1"));
    let num: BigInt = num.parse().unwrap();
    step["dist_sq"] = Value::String(format!("{}/{den}", num * 2));
    fs::write(&trace, serde_json::to_string_pretty(&t).unwrap()).unwrap();
    let o = maxsing(&["verify", &trace]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("index 4: (d)"), "{err}");
}

#[test]
fn malformed_trace_exits_1() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\"version\": 1}").unwrap();
    assert_eq!(code(&maxsing(&["verify", p.to_str().unwrap()])), 1);
    assert_eq!(code(&maxsing(&["verify", dir.path().join("missing.json").to_str().unwrap()])), 1);
}

#[test]
fn bruteforce_section_is_populated() {
    let dir = TempDir::new().unwrap();
    let trace = gen_split4(dir.path(), "t.json", "8");
    let o = maxsing(&["verify", &trace, "--bruteforce-xmax", "25", "--threads", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let bf = &r["bruteforce"];
    assert_eq!(bf["passed"], true);
    assert_eq!(bf["profile"]["rows"].as_array().unwrap().len(), 25);
    assert!(!bf["domination"].as_array().unwrap().is_empty());

    let o = maxsing(&["bruteforce", &trace, "--xmax", "5"]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 6);
    assert!(table.lines().nth(2).unwrap().contains("(1,0,1,0)"));

    let o = maxsing(&["bruteforce", &trace, "--xmax", "5000"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("too large"));
}

#[test]
fn exponent_table_and_json() {
    let dir = TempDir::new().unwrap();
    let trace = gen_split4(dir.path(), "t.json", "8");
    let o = maxsing(&["exponent", &trace]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8(o.stdout).unwrap();
    let header: Vec<&str> = table.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["index", "X_i", "lambda_lb"]);
    assert_eq!(table.lines().count(), 7);

    let o = maxsing(&["exponent", &trace, "--json"]);
    let arr: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(arr.as_array().unwrap().len(), 6);
    assert!(arr[0]["lambda_lb"].is_string());

    let short = gen_split4(dir.path(), "short.json", "2");
    assert_eq!(code(&maxsing(&["exponent", &short])), 1);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = gen_split4(dir.path(), "a.json", "9");
    let b = gen_split4(dir.path(), "b.json", "9");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let r1 = maxsing(&["verify", &a, "--bruteforce-xmax", "12", "--threads", "1"]).stdout;
    let r2 = maxsing(&["verify", &a, "--bruteforce-xmax", "12", "--threads", "3"]).stdout;
    assert_eq!(r1, r2);
}

#[test]
fn precision_env_var_is_honoured() {
    let dir = TempDir::new().unwrap();
    let trace = gen_split4(dir.path(), "t.json", "6");
    let o = Command::new(env!("CARGO_BIN_EXE_maxsing"))
        .args(["exponent", &trace, "--json"])
        .env("MAXSING_PRECISION_BITS", "128")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let default: Value = serde_json::from_slice(&maxsing(&["exponent", &trace, "--json"]).stdout).unwrap();
    let fine: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_ne!(default, fine);
}

#[test]
fn klinear_map_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let map = dir.path().join("map.json");
    fs::write(
        &map,
        r#"{ "k": 2, "n": 3, "D": 3, "basis_images": [
            { "index": [0, 1], "image": ["1", "0", "0"] },
            { "index": [1, 2], "image": ["0", "1", "0"] },
            { "index": [2, 0], "image": ["0", "0", "1/2"] } ] }"#,
    )
    .unwrap();
    let out = dir.path().join("k.json");
    let (map, out) = (map.to_str().unwrap(), out.to_str().unwrap());
    let o = maxsing(&["gen", "--family", "klinear", "--file", map, "--phi", "pow", "1/2", "--steps", "6", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&maxsing(&["verify", out])), 0);
}
