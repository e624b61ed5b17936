//! End-to-end checks of the binary: exit codes, report shape, byte-identical
//! output across runs (modulo the wall-time field).

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_tsorbits"))
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn strip_wall(v: &mut serde_json::Value) {
    if let Some(map) = v.as_object_mut() {
        map.remove("wall_ms");
    }
}

#[test]
fn count_command() {
    let out = run(&[
        "count", "--kind", "orthogonal", "--n", "16", "--m", "8", "--k", "2", "--q", "2",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["count"], "90516075");
    assert_eq!(v["dim_variety"], 25); // 2*16 - (2 + 12)/2
}

#[test]
fn verify_table_pass_and_report_stability() {
    let out1 = run(&["verify-table", "a2", "--q", "3"]);
    assert!(out1.status.success(), "exit 0 on pass");
    let out2 = run(&["verify-table", "a2", "--q", "3"]);
    let mut v1 = json_of(&out1);
    let mut v2 = json_of(&out2);
    strip_wall(&mut v1);
    strip_wall(&mut v2);
    assert_eq!(v1, v2, "byte-identical reports modulo wall time");
    assert_eq!(v1["lhs"], "3640");
    assert_eq!(v1["rhs"], "3640");
    assert_eq!(v1["pass"], true);
}

#[test]
fn usage_errors_exit_2() {
    // invalid case/q pairing
    let out = run(&["enumerate", "--case", "a2-adjoint", "--q", "4", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown case
    let out = run(&["enumerate", "--case", "nope", "--q", "3", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown table
    let out = run(&["verify-table", "zz", "--q", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_exhaustion_exits_3() {
    let out = run(&[
        "enumerate",
        "--case",
        "a2-adjoint",
        "--q",
        "3",
        "--k",
        "2",
        "--memory-budget-mb",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn enumerate_partitions_a2() {
    let out = run(&["enumerate", "--case", "a2-adjoint", "--q", "3", "--k", "2"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["orbit_count"], 7);
    assert_eq!(v["total"], "3640");
    assert_eq!(v["pass"], true);
}

#[test]
fn enumerate_with_start_and_key_dump() {
    let dir = std::env::temp_dir().join("tsorbits-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let start = dir.join("start.json");
    // span{x, e_a2} in the 7-dimensional module: orbit of size 13
    std::fs::write(
        &start,
        r#"{"n":7,"k":2,"q":3,"basis":[[0,1,0,0,0,0,0],[0,0,1,0,0,0,0]]}"#,
    )
    .unwrap();
    let keys = dir.join("orbit.tsok");
    let out = run(&[
        "enumerate",
        "--case",
        "a2-adjoint",
        "--q",
        "3",
        "--k",
        "2",
        "--start",
        start.to_str().unwrap(),
        "--emit-keys",
        keys.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["orbit_size"], "13");
    // key dump format: magic, n, k, q, then 13 keys of k rows x 2 bytes
    let bytes = std::fs::read(&keys).unwrap();
    assert_eq!(&bytes[0..4], b"TSOK");
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    assert_eq!(word(4), 7);
    assert_eq!(word(8), 2);
    assert_eq!(word(12), 3);
    // 7 entries x 2 bits = 14 bits -> 2 bytes per row
    assert_eq!(bytes.len(), 16 + 13 * 2 * 2);
}

#[test]
fn emit_keys_without_start_is_usage_error() {
    let out = run(&[
        "enumerate", "--case", "a2-adjoint", "--q", "3", "--k", "2", "--emit-keys", "/tmp/x.tsok",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn detect_form_and_screen() {
    let out = run(&["detect-form", "--case", "a1-sym3", "--q", "5"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["form"]["kind"], "alternating");

    let out = run(&["screen", "--table1"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["pass"], true);
    assert!(v["rows"].as_array().unwrap().len() >= 16);
}

#[test]
fn tables_dir_override() {
    let dir = std::env::temp_dir().join("tsorbits-tables-test");
    std::fs::create_dir_all(&dir).unwrap();
    // a modified a2 table whose identity fails: drop a row
    let bundled = include_str!("../../core/tables/a2.json");
    let mut t: serde_json::Value = serde_json::from_str(bundled).unwrap();
    t["rows"].as_array_mut().unwrap().pop();
    std::fs::write(dir.join("a2.json"), serde_json::to_string(&t).unwrap()).unwrap();
    let out = run(&["verify-table", "a2", "--q", "3", "--tables-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "failed verdict exits 1");
    let v = json_of(&out);
    assert_eq!(v["pass"], false);
}

#[test]
fn classify_spinors_gf2() {
    let out = run(&["classify-spinors", "--q", "2"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["white"], "2295");
    assert_eq!(v["grey"], "63240");
    assert_eq!(v["total"], "65535");
    assert_eq!(v["pass"], true);
}

#[test]
fn dense_family_q4() {
    let out = run(&["dense-family", "--q", "4"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["pairwise_distinct_orbits"], true);
    assert_eq!(v["family"].as_array().unwrap().len(), 2);
}
