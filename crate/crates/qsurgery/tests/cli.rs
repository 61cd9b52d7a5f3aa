use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsurgery"))
        .args(args)
        .env_remove("QSURGERY_SEED")
        .env_remove("QSURGERY_OUT")
        .env_remove("QSURGERY_FORMAT")
        .env_remove("QSURGERY_ROUNDS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn build_extractor_on_steane_passes() {
    let o = run(&["build-extractor", &data("steane.code")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("desiderata: all pass"));
}

#[test]
fn malformed_code_names_the_line() {
    let o = run(&["build-extractor", &data("malformed.code")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn anticommuting_generators_are_rejected() {
    let o = run(&["build-extractor", &data("anticommuting.code")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("anticommute"));
}

#[test]
fn clifford_only_circuit_compiles_to_final_rounds() {
    let v = json(&["compile", &data("clifford.circ"), &data("pairs.json"), &data("line2.json")]);
    let r = &v["result"];
    assert_eq!(r["lambda"], 0);
    assert_eq!(r["magic_count"], 0);
    assert_eq!(r["depth"], 2);
    assert!(r["runtime"]["small_cache"].is_object());
    assert!(r["runtime"]["large_cache"].is_object());
}

#[test]
fn parallel_t_gates_share_one_class() {
    let v = json(&["compile", &data("t_parallel.circ"), &data("pairs.json"), &data("line2.json")]);
    let s = &v["result"]["schedule"];
    assert_eq!(s["classes"].as_array().unwrap().len(), 1);
    assert_eq!(s["magic_count"], 2);
    assert_eq!(s["final_rounds"].as_array().unwrap().len(), 2);
}

#[test]
fn incompatible_cnot_lists_the_gate() {
    let o = run(&["compile", &data("incompatible.circ"), &data("triples.json"), &data("line3.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gate 1"), "{}", stderr(&o));
}

#[test]
fn verify_fixtures_pass() {
    for f in ["steane-logical-z", "4_2_2-bridge-pair"] {
        let v = json(&["verify", f]);
        assert_eq!(v["result"]["pass"], true, "{f}");
    }
}

#[test]
fn verify_compiled_circuit() {
    let v = json(&["verify", &data("cross.circ"), "--partition", &data("pairs.json"), "--blockmap", &data("line2.json")]);
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn oversized_code_is_refused() {
    let o = run(&["verify", "fixture:steane", "--operator", "ZZZZZZZ"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("exceed"));
}

#[test]
fn artifacts_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let args = ["--seed", "7", "--out", a.to_str().unwrap(), "build-extractor", "fixture:4_2_2"];
    let mut runs = Vec::new();
    for _ in 0..2 {
        assert!(run(&args).status.success());
        runs.push(std::fs::read(a.join("build-extractor.json")).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    let fa = &runs[0];
    let doc: serde_json::Value = serde_json::from_slice(fa).unwrap();
    assert_eq!(doc["seed"], 7);
    assert!(doc["version"].is_string());
    assert!(doc["config"]["caps"].is_object());
    assert!(a.join("build-extractor.dot").exists());
    let o = run(&["report", a.join("build-extractor.json").to_str().unwrap()]);
    assert!(stdout(&o).contains("seed 7"));
}

#[test]
fn fault_search_reports_violation_when_check_dropped() {
    let ok = json(&["--rounds", "2", "fault-search", "fixture:4_2_2", "--operator", "ZZII"]);
    assert!(ok["result"]["search"]["violation"].is_null());
    let o = run(&["--rounds", "2", "fault-search", "fixture:4_2_2", "--operator", "ZZII", "--drop-vertex-check", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("violation"));
}

#[test]
fn merge_and_simulate() {
    let v = json(&["merge", "fixture:steane", "--operator", "ZZZIIII"]);
    assert_eq!(v["result"]["k"], 0);
    let s = json(&["--seed", "3", "simulate", "fixture:4_2_2", "--operator", "ZZII", "--fix", "ZIZI"]);
    assert!(s["result"]["trace"]["sigma"].is_number());
}

#[test]
fn assemble_line_and_bridge() {
    let v = json(&["assemble", "fixture:4_2_2", "--blocks", "3", "--d", "2"]);
    let p = &v["result"]["params"];
    assert_eq!(p["total_qubits"].as_f64().unwrap(), p["formula_total"].as_f64().unwrap());
    let b = json(&["bridge", "fixture:4_2_2", "fixture:4_2_2", "--d", "2"]);
    assert_eq!(b["result"]["bridge"]["pairs"].as_array().unwrap().len(), 2);
}
