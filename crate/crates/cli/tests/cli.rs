use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_padic-haar"));
    c.env_remove("PADIC_HAAR_MAX_CANDIDATES").env_remove("PADIC_HAAR_MAX_TABLE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let o = run(&a);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn golden(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn orders_d2_all_match() {
    let o = run(&["orders", "--d", "2", "--p", "3", "--n-max", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("orders_d2_p3.csv"));
    for line in stdout(&o).lines().skip(1) {
        assert!(line.ends_with(",true"), "{line}");
    }
}

#[test]
fn orders_d3() {
    let j = json(&["orders", "--d", "3", "--p", "3", "--n-max", "2"]);
    let rows = j["rows"].as_array().unwrap();
    let orders: Vec<u64> = rows.iter().map(|r| r["enumerated_order"].as_u64().unwrap()).collect();
    assert_eq!(orders, [72, 1944]);
    assert!(rows.iter().all(|r| r["match"] == true));
    assert_eq!(rows[0]["brute_order"], 72);
    assert_eq!(j["schema"], "padic-haar/orders/v1");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["orders", "--p", "4"]).status.code(), Some(2));
    assert_eq!(run(&["orders", "--p", "9"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--d", "3", "--kappa", "p", "--p", "3", "--n", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["measure", "--d", "2", "--kappa", "p", "--p", "3", "--n", "1", "--ball", "I", "--format", "csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn identity_ball_in_so3() {
    let o = run(&["measure", "--ball", "I", "--n", "1", "--d", "3", "--p", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("1/72"));
    let j = json(&["measure", "--ball", "I", "--n", "1", "--d", "3", "--p", "3"]);
    assert_eq!(j["measure"], "1/72");
    assert_eq!(j["set"]["member_encodings"].as_array().unwrap().len(), 1);
}

#[test]
fn ball_expressions() {
    let base = ["measure", "--d", "2", "--kappa", "-v", "--p", "3", "--n", "2", "--ball", "I", "--ball", "A=2002:1"];
    let with = |e: &str| {
        let mut a = base.to_vec();
        a.extend(["--expr", e]);
        json(&a)["measure"].as_str().unwrap().to_string()
    };
    assert_eq!(with("I"), "1/12");
    assert_eq!(with("A"), "1/4");
    assert_eq!(with("I | A"), "1/3");
    assert_eq!(with("!(I | A)"), "2/3");
    assert_eq!(with("G - A"), "3/4");
    assert_eq!(with("I & A"), "0");
}

#[test]
fn cardano_two_decompositions() {
    let t = json(&["enumerate", "--d", "3", "--p", "3", "--n", "1"]);
    for e in t["elements"].as_array().unwrap().iter().step_by(9) {
        let j = json(&["cardano", "--p", "3", "--n", "1", "--element", e.as_str().unwrap()]);
        assert_eq!(j["count"], 2);
        assert_eq!(j["partners"], true);
    }
    // not a group element
    assert_eq!(run(&["cardano", "--p", "3", "--element", "100010002"]).status.code(), Some(2));
}

#[test]
fn lift_tower_golden() {
    let o = run(&[
        "lift",
        "--d",
        "2",
        "--kappa",
        "-v",
        "--p",
        "3",
        "--matrix",
        "0120",
        "--to-level",
        "3",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("lift_mv_p3.json"));
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    let levels: Vec<u64> = j["tower"].as_array().unwrap().iter().map(|m| m["n"].as_u64().unwrap()).collect();
    assert_eq!(levels, [1, 2, 3]);
}

#[test]
fn lift_policies() {
    let a = json(&["lift", "--d", "3", "--p", "3", "--matrix", "100010001", "--to-level", "3", "--policy", "seed=5"]);
    let b = json(&["lift", "--d", "3", "--p", "3", "--matrix", "100010001", "--to-level", "3", "--policy", "seed=5"]);
    assert_eq!(a, b);
    let all = json(&["lift", "--d", "3", "--p", "3", "--matrix", "100010001", "--all"]);
    assert_eq!(all["lifts"].as_array().unwrap().len(), 27);
    assert_eq!(
        run(&["lift", "--d", "2", "--kappa", "p", "--p", "3", "--matrix", "1001", "--policy", "random"]).status.code(),
        Some(2)
    );
}

#[test]
fn samples_are_byte_stable() {
    let args = ["sample", "--d", "3", "--p", "3", "--level", "2", "--count", "5", "--seed", "7", "--format", "json"];
    let a = stdout(&run(&args));
    assert_eq!(a, stdout(&run(&args)));
    assert_eq!(a, golden("sample_d3_p3.json"));
    // beyond the table budget the sampler lifts instead
    let o = bin()
        .args(["sample", "--d", "3", "--p", "5", "--level", "4", "--count", "2", "--format", "json"])
        .env("PADIC_HAAR_MAX_TABLE", "100000")
        .output()
        .unwrap();
    assert!(o.status.success());
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["samples"][0].as_str().unwrap().len(), 9 * 4);
}

#[test]
fn rot_golden() {
    let o = run(&[
        "rot", "--d", "2", "--kappa", "up", "--p", "5", "--n", "2", "--sigma", "3", "--branch", "F", "--format", "json",
    ]);
    assert_eq!(stdout(&o), golden("rot_up_p5.json"));
    let x = json(&["rot", "--d", "3", "--axis", "x", "--p", "3", "--n", "1", "--sigma", "0"]);
    assert_eq!(x["digits"], "100010001");
    assert_eq!(run(&["rot", "--d", "3", "--p", "3", "--n", "1", "--sigma", "0"]).status.code(), Some(2));
}

#[test]
fn enumerate_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    let o = run(&[
        "enumerate",
        "--d",
        "2",
        "--kappa",
        "p",
        "--p",
        "3",
        "--n",
        "2",
        "--oracle",
        "both",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let j: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(j["schema"], "padic-haar/group-table/v1");
    assert_eq!(j["order"], 18);
    assert_eq!(j["oracles_agree"], true);
    let plain = json(&["enumerate", "--d", "2", "--kappa", "p", "--p", "3", "--n", "2"]);
    assert_eq!(serde_json::to_string_pretty(&plain).unwrap() + "\n", golden("table_p_p3_n2.json"));
}

#[test]
fn compare_integral_table() {
    let o = run(&["compare-integral", "--p", "3", "--n-max", "3", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("compare_p3.csv"));
    assert!(stdout(&o).starts_with("kappa,p,n,integral_value,counting_value,equal\n"));
}

#[test]
fn verify_subset() {
    let j = json(&["verify", "--only", "hensel", "--p", "5"]);
    let checks = j["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["group"] == "hensel" && c["status"] == "pass"));
    assert_eq!(j["failed"], 0);
    let integral = json(&["verify", "integral", "--p", "3"]);
    assert!(integral["checks"].as_array().unwrap().iter().all(|c| c["group"] == "integral"));
}

#[test]
fn tampered_constant_fails() {
    let o = run(&["verify", "orders", "--p", "3", "--tamper"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["verify", "orders", "--p", "3"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn budget_exhaustion_skips() {
    let o = bin()
        .args(["verify", "oracle", "--p", "3", "--format", "json"])
        .env("PADIC_HAAR_MAX_CANDIDATES", "1000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["failed"], 0);
    assert!(j["skipped"].as_u64().unwrap() > 0);
    let o = run(&["enumerate", "--d", "3", "--p", "5", "--n", "2", "--max-table", "10"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn full_suite_passes() {
    let o = run(&["verify", "--format", "json"]);
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", j["checks"]);
    assert_eq!(j["schema"], "padic-haar/verify/v1");
    let groups: std::collections::BTreeSet<&str> =
        j["checks"].as_array().unwrap().iter().map(|c| c["group"].as_str().unwrap()).collect();
    assert_eq!(groups.len(), 8);
}
