use std::path::Path;
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cyclocode(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cyclocode"))
        .args(args)
        .env_remove("CYCLOCODE_BUDGET")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn machine(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "machine"]);
    let run = cyclocode(&all);
    let doc = serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}{}", run.stdout, run.stderr));
    (run.code, doc)
}

fn row<'a>(doc: &'a Value, key: &str) -> &'a Value {
    doc["report"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["key"] == key)
        .unwrap_or_else(|| panic!("no row {key}"))
}

fn without_timing(mut doc: Value) -> Value {
    doc["manifest"]["elapsed_ms"] = Value::Null;
    doc
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_rows() {
    let (code, doc) = machine(&["bounds", "--n", "7", "--q", "2", "--d", "3"]);
    assert_eq!(code, 0);
    assert_eq!(row(&doc, "gv")["value"]["exact"], "128/29");
    assert_eq!(doc["manifest"]["command"], "bounds");
    assert_eq!(doc["status"], "pass");

    let (_, doc) = machine(&["bounds", "--n", "6", "--weight", "3", "--d", "3"]);
    assert_eq!(row(&doc, "levenshtein")["value"]["exact"], "2");

    let (code, doc) = machine(&["bounds", "--n", "8", "--d", "1", "--eps", "0.1"]);
    assert_eq!(code, 0);
    let nxy = &row(&doc, "nxy_hcc")["value"];
    assert_eq!(nxy["kind"], "unavailable");
    assert!(nxy["reason"].as_str().unwrap().starts_with("division-domain"));
}

#[test]
fn text_output_has_table_then_json() {
    let run = cyclocode(&["bounds", "--n", "7", "--d", "3"]);
    assert_eq!(run.code, 0);
    let (table, json) = run.stdout.split_once("--- machine ---\n").unwrap();
    assert!(table.contains("128/29"));
    let doc: Value = serde_json::from_str(json).unwrap();
    assert_eq!(row(&doc, "gv")["value"]["exact"], "128/29");
}

#[test]
fn construct_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("hcc.txt");
    let (code, doc) = machine(&["construct", "--n", "7", "--d", "3", "--out", path_str(&file)]);
    assert_eq!(code, 0);
    let c = &doc["report"]["construction"];
    assert_eq!(c["size"].as_u64().unwrap() % 7, 0);
    assert_eq!(c["verdict"]["pass"], true);
    assert!(c["k_hat"].is_number());

    let (code, doc) = machine(&["verify", path_str(&file)]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["verdict"]["pass"], true);
    assert_eq!(doc["report"]["verdict"]["min_distance"], 3);

    // Claiming a larger distance than the code has fails with a witness.
    let (code, doc) = machine(&["verify", path_str(&file), "--d", "4"]);
    assert_eq!(code, 1);
    assert_eq!(doc["report"]["verdict"]["failure"]["check"], "distance");
}

#[test]
fn construct_ooc() {
    let (code, doc) = machine(&["construct", "--n", "7", "--d", "3", "--weight", "3"]);
    assert_eq!(code, 0);
    let text = doc["report"]["code_file"].as_str().unwrap();
    assert!(text.lines().any(|l| l == "OOC 7 2 3 3"));
    let words: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(words.len() % 7, 0);
    assert!(words.iter().all(|w| w.matches('1').count() == 3));
}

#[test]
fn corrupted_file_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("hcc.txt");
    assert_eq!(cyclocode(&["construct", "--n", "7", "--d", "3", "--out", path_str(&file)]).code, 0);
    let text = std::fs::read_to_string(&file).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let target = lines.iter().position(|l| !l.starts_with('#') && !l.starts_with("HCC")).unwrap();
    let flipped: String = lines[target]
        .chars()
        .enumerate()
        .map(|(i, c)| if i == 0 { if c == '0' { '1' } else { '0' } } else { c })
        .collect();
    lines[target] = flipped;
    std::fs::write(&file, lines.join("\n") + "\n").unwrap();
    let (code, doc) = machine(&["verify", path_str(&file)]);
    assert_eq!(code, 1);
    assert_eq!(doc["status"], "fail");
    let failure = &doc["report"]["verdict"]["failure"];
    assert!(!failure["words"].as_array().unwrap().is_empty(), "{failure}");
}

#[test]
fn empty_code_passes_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("empty.txt");
    let (code, doc) = machine(&["construct", "--n", "5", "--d", "6", "--out", path_str(&file)]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["construction"]["notes"][0], "empty vertex set");
    let (code, doc) = machine(&["verify", path_str(&file)]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["verdict"]["warnings"][0], "empty code: passes vacuously");
}

#[test]
fn malformed_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "# comment\nHCC 4 2 2\n0001\n00x1\n").unwrap();
    let run = cyclocode(&["verify", path_str(&file)]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("line 4"), "{}", run.stderr);
    let missing = cyclocode(&["verify", path_str(&dir.path().join("absent.txt"))]);
    assert_eq!(missing.code, 2);
}

#[test]
fn exit_codes_for_usage_and_capacity() {
    assert_eq!(cyclocode(&["bounds"]).code, 2);
    assert_eq!(cyclocode(&["bounds", "--n", "5", "--q", "1"]).code, 2);
    assert_eq!(cyclocode(&["experiment", "setA", "--n", "8"]).code, 2);
    let (code, doc) = machine(&["experiment", "setA", "--n", "16", "--eps", "0.3", "--budget", "1000"]);
    assert_eq!(code, 3);
    assert_eq!(doc["status"], "error");
    assert!(doc["error"].as_str().unwrap().contains("capacity"));
    assert_eq!(doc["manifest"]["budget"]["enumeration"], 1000);
}

#[test]
fn budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cyclocode"))
        .args(["experiment", "setA", "--n", "12", "--eps", "0.1", "--format", "machine"])
        .env("CYCLOCODE_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn experiments() {
    let (code, doc) = machine(&["experiment", "setA", "--n", "16", "--q", "2", "--eps", "0.3"]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["count"], 61952);
    assert_eq!(doc["report"]["holds"], true);

    let (code, doc) = machine(&["experiment", "setB", "--n", "16", "--eps", "0.2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["count"], 12736);

    let (_, doc) = machine(&["experiment", "intersection-decay", "--n", "8", "--q", "2", "--t", "3"]);
    let counts: Vec<u64> = doc["report"]["rows"].as_array().unwrap().iter().map(|r| r["intersection"].as_u64().unwrap()).collect();
    assert_eq!(counts, [93, 58, 58, 38, 38, 20, 20, 0, 0]);

    let (_, doc) = machine(&["experiment", "sparsity", "--n", "8", "--d", "3", "--tau", "1/4"]);
    assert_eq!(doc["report"]["max_s"], 7);
    assert_eq!(doc["report"]["max_neighborhood_edges"], 15);
}

#[test]
fn mc_tail_independent_of_threads() {
    let args = ["experiment", "mc-tail", "--n", "64", "--eps", "0.1", "--samples", "20000", "--seed", "9"];
    let one = machine(&[&args[..], &["--threads", "1"]].concat()).1;
    let four = machine(&[&args[..], &["--threads", "4"]].concat()).1;
    assert_eq!(one["report"], four["report"]);
    assert_eq!(one["manifest"]["generator"], "chacha8");
    assert_eq!(one["manifest"]["seed"], 9);
}

#[test]
fn replay_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["construct", "--n", "9", "--d", "3", "--strategy", "random-restart", "--restarts", "5", "--seed", "3"],
        vec!["experiment", "mc-tail", "--n", "50", "--eps", "0.1", "--samples", "5000", "--seed", "4"],
        vec!["graph-stats", "--n", "8", "--d", "2", "--show-vertices"],
    ] {
        let (code, first) = machine(&args);
        assert_eq!(code, 0);
        let saved = dir.path().join("run.json");
        std::fs::write(&saved, serde_json::to_string(&first).unwrap()).unwrap();
        let (code, again) = machine(&["replay", path_str(&saved)]);
        assert_eq!(code, 0);
        assert_eq!(without_timing(first), without_timing(again));
    }
}

#[test]
fn replay_accepts_text_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = cyclocode(&["bounds", "--n", "7", "--d", "3"]);
    let saved = dir.path().join("run.txt");
    std::fs::write(&saved, &run.stdout).unwrap();
    let again = cyclocode(&["replay", path_str(&saved)]);
    assert_eq!(again.code, 0);
    let strip = |s: &str| s.lines().filter(|l| !l.contains("elapsed_ms")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&run.stdout), strip(&again.stdout));
}

#[test]
fn fhs_and_wmuc_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let hcc = dir.path().join("hcc.txt");
    let fhs = dir.path().join("fhs.txt");
    let wmuc = dir.path().join("wmuc.txt");
    assert_eq!(cyclocode(&["construct", "--n", "7", "--d", "3", "--out", path_str(&hcc)]).code, 0);

    let (code, doc) = machine(&["fhs", path_str(&hcc), "--out", path_str(&fhs)]);
    assert_eq!(code, 0);
    assert!(doc["report"]["correlation"]["lambda_achieved"].as_u64().unwrap() <= 4);
    let (code, doc) = machine(&["verify", path_str(&fhs)]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["checked"]["kind"], "FHS");
    assert!(doc["report"]["correlation"]["max_auto"].is_number());

    let (code, doc) = machine(&["wmuc", path_str(&hcc), "--out", path_str(&wmuc)]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["kappa"], 5);
    assert_eq!(machine(&["verify", path_str(&wmuc)]).0, 0);

    // Too small a kappa for the distance is a contract failure.
    assert_eq!(cyclocode(&["wmuc", path_str(&hcc), "--kappa", "2"]).code, 1);
}

#[test]
fn derivations_construct_when_no_file_is_given() {
    let (code, doc) = machine(&["fhs", "--n", "8", "--q", "3", "--d", "4"]);
    assert_eq!(code, 0);
    assert!(doc["report"]["correlation"]["lambda_achieved"].as_u64().unwrap() <= 4);
    let (code, _) = machine(&["wmuc", "--n", "8", "--d", "5"]);
    assert_eq!(code, 0);
    assert_eq!(cyclocode(&["fhs", "--d", "3"]).code, 2);
}
