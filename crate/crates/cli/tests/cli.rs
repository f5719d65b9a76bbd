use std::process::{Command, Output};

use growthbound::formats::record::validate_run_record;

fn gb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_growthbound")).args(args).output().expect("binary runs")
}

const BARTHOLDI: &str = ".305061,.34747,.223839,.123631";

#[test]
fn target_json_matches_reference_and_schema() {
    let out = gb(&["target", "grigorchuk", "--weights", BARTHOLDI, "--target", ".99", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    validate_run_record(&v).unwrap();
    assert_eq!(v["status"], "found");
    assert!((v["eta"].as_f64().unwrap() - 0.8105).abs() < 1e-3);
    assert!((v["alpha"].as_f64().unwrap() - 0.7674).abs() < 1e-3);
}

#[test]
fn identical_runs_give_identical_json() {
    let args = ["target", "grigorchuk", "--weights", BARTHOLDI, "--target", ".9", "--json"];
    assert_eq!(gb(&args).stdout, gb(&args).stdout);
}

#[test]
fn bound_of_eta_one() {
    let out = gb(&["bound", "--eta", "1.0", "--d", "2"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim().parse::<f64>().unwrap(), 1.0);
}

#[test]
fn radius_exceeded_exits_two() {
    let out = gb(&["target", "grigorchuk", "--radius-cap", "12"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_input_exits_one() {
    assert_eq!(gb(&["target", "no-such-machine"]).status.code(), Some(1));
    assert_eq!(gb(&["target", "grigorchuk", "--weights", "1,2"]).status.code(), Some(1));
}

#[test]
fn machine_file_and_count_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("g.txt");
    std::fs::write(&m, "a=<e,e>(1,2)\nb=<a,c>\nc=<a,d>\nd=<e,b>\ne=<e,e>\n").unwrap();
    let cm = dir.path().join("cm.json");
    let out = gb(&[
        "target",
        m.to_str().unwrap(),
        "--aux-blocks",
        "{a},{b,c,d}",
        "--weights",
        BARTHOLDI,
        "--json",
        "--count-matrix",
        cm.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["egg_size"], 4);
    let c: serde_json::Value = serde_json::from_slice(&std::fs::read(cm).unwrap()).unwrap();
    assert_eq!(c["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn opt_and_growth_and_superpoly_run() {
    let out = gb(&["opt", "grigorchuk", "--weights", ".3,.35,.22,.13", "--targets", ".95,.85", "--radius-cap", "30", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    validate_run_record(&v).unwrap();

    let g = gb(&["growth", "grigorchuk", "--maxlen", "2"]);
    assert_eq!(String::from_utf8_lossy(&g.stdout), "0\t1\n1\t5\n2\t11\n");

    let s = gb(&["superpoly", "grigorchuk", "--weights", BARTHOLDI, "--maxlen", "5"]);
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stdout));

    let d = gb(&["export-dot", "grigorchuk", "--dual"]);
    assert!(String::from_utf8_lossy(&d.stdout).contains("graph"));
}
