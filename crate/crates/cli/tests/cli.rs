use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_planminer");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("PLANMINER_SERVER").output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn mines_the_running_example() {
    let table = data("table1.csv");
    let table = table.to_str().unwrap();
    assert_eq!(stdout(&["mine", "--in", table, "--format", "text"]), "→(a, ×(∧(b, c), d), e)\n");
    let tree = json(&["mine", "--in", table]);
    assert_eq!(tree["op"], "seq");
    let ops: Vec<&str> = tree["children"].as_array().unwrap().iter().map(|c| c["op"].as_str().unwrap()).collect();
    assert_eq!(ops, ["leaf", "xor", "leaf"]);
    assert_eq!(tree["children"][1]["children"][0]["op"], "and");
}

#[test]
fn plans_with_project_one_durations() {
    let table = data("table1.csv");
    let args = ["plan", "--in", table.to_str().unwrap(), "--choose", "xor1=0", "--durations", "fixed:proj1"];
    let plan = json(&args);
    assert_eq!(plan["schedule"]["makespan"], 11.0);
    assert_eq!(plan["relaxation"]["gain"], 3.5);
    let text = stdout(&[&args[..], &["--format", "text"]].concat());
    assert!(text.contains("makespan: 11 h"), "{text}");
    assert!(text.contains("critical path: a → b → e"), "{text}");
}

#[test]
fn filter_drops_the_rare_branch() {
    let log = data("log100.csv");
    let dot = stdout(&["filter", "--in", log.to_str().unwrap(), "--gamma", "0.05", "--format", "dot"]);
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains(r#"label="e\n(100)""#), "{dot}");
    assert!(!dot.contains(r#"label="d\n"#));
    let full = stdout(&["filter", "--in", log.to_str().unwrap(), "--format", "dot"]);
    assert!(full.contains(r#"label="d\n(2)""#));
}

#[test]
fn rules_flag_annotates_the_net() {
    let table = data("table1.csv");
    let table = table.to_str().unwrap();
    assert_eq!(json(&["filter", "--in", table])["rules"], serde_json::json!([]));
    let model = json(&["filter", "--in", table, "--rules"]);
    assert_eq!(model["rules"][0]["summary"], "client = IZ → d else {b,c}");
    let text = stdout(&["rules", "--in", table, "--format", "text"]);
    assert!(text.contains("IF client = IZ THEN d"), "{text}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let table = data("table1.csv");
    let log = data("log100.csv");
    let (table, log) = (table.to_str().unwrap(), log.to_str().unwrap());
    let commands: Vec<Vec<&str>> = vec![
        vec!["mine", "--in", table],
        vec!["filter", "--in", log, "--gamma", "0.05", "--rules"],
        vec!["filter", "--in", log, "--gamma", "0.05", "--format", "dot"],
        vec!["rules", "--in", table],
        vec!["variants", "--in", log, "--gamma", "0.05", "--format", "text"],
        vec!["plan", "--in", table, "--choose", "xor1=0", "--durations", "fixed:1"],
        vec!["report", "--in", table, "--choose", "xor1=1", "--format", "text"],
        vec!["report", "--in", log, "--gamma", "0.05"],
    ];
    for args in commands {
        assert_eq!(stdout(&args), stdout(&args), "{args:?}");
    }
}

#[test]
fn composed_steps_match_a_single_plan() {
    let dir = tempfile::tempdir().unwrap();
    let log = data("log100.csv");
    let log = log.to_str().unwrap();
    let tree = dir.path().join("tree.json");
    let model = dir.path().join("model.json");
    std::fs::write(&tree, stdout(&["mine", "--in", log])).unwrap();
    std::fs::write(&model, stdout(&["filter", "--in", log, "--tree", tree.to_str().unwrap(), "--gamma", "0.05"]))
        .unwrap();
    let composed = stdout(&[
        "plan",
        "--in",
        log,
        "--tree",
        model.to_str().unwrap(),
        "--choose",
        "xor1=0",
        "--durations",
        "fixed:1",
    ]);
    let single = stdout(&["plan", "--in", log, "--gamma", "0.05", "--choose", "xor1=0", "--durations", "fixed:1"]);
    assert_eq!(composed, single);

    // the threshold carried in the filter output still rejects the filtered branch
    let out = run(&["plan", "--in", log, "--tree", model.to_str().unwrap(), "--choose", "xor1=1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let table = data("table1.csv");
    let table = table.to_str().unwrap();
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["mine"]), Some(2));
    assert_eq!(code(&["filter", "--in", table, "--gamma", "1.5"]), Some(2));
    assert_eq!(code(&["plan", "--in", table, "--choose", "xor1"]), Some(2));
    assert_eq!(code(&["plan", "--in", table, "--choose", "xor1=0", "--durations", "guess"]), Some(2));
    assert_eq!(code(&["variants", "--in", table, "--format", "dot"]), Some(2));
    assert_eq!(code(&["mine", "--in", "/nonexistent.csv"]), Some(1));
    assert_eq!(code(&["plan", "--in", table]), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "project_id,event_id,activity,timestamp,duration\n1,e1,a,never,1:00\n").unwrap();
    let out = run(&["mine", "--in", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 1"));
}

#[test]
fn generated_logs_are_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    std::fs::write(&tree, stdout(&["mine", "--in", data("table1.csv").to_str().unwrap()])).unwrap();
    let tree = tree.to_str().unwrap();
    let first = stdout(&["gen", "--tree", tree, "--cases", "20", "--seed", "7"]);
    assert_eq!(first, stdout(&["gen", "--tree", tree, "--cases", "20", "--seed", "7"]));
    assert_ne!(first, stdout(&["gen", "--tree", tree, "--cases", "20", "--seed", "8"]));
    let log = dir.path().join("generated.csv");
    std::fs::write(&log, &first).unwrap();
    let mined = stdout(&["mine", "--in", log.to_str().unwrap(), "--format", "text"]);
    assert!(mined.starts_with("→(a, "), "{mined}");
    assert_eq!(run(&["gen", "--cases", "3", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--tree", tree]).status.code(), Some(2));
}

#[test]
fn talks_to_a_running_server() {
    let mut server = Command::new(BIN)
        .args(["serve", "--port", "0"])
        .env_remove("PLANMINER_PORT")
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(server.stderr.take().unwrap());
    let mut line = String::new();
    stderr.read_line(&mut line).unwrap();
    std::thread::spawn(move || std::io::copy(&mut stderr, &mut std::io::sink()));
    let url = line.trim().strip_prefix("listening on ").unwrap().to_string();

    let table = data("table1.csv");
    let args = ["plan", "--in", table.to_str().unwrap(), "--choose", "xor1=0", "--durations", "fixed:1"];
    let remote = stdout(&[&["--server", url.as_str()][..], &args[..]].concat());
    server.kill().unwrap();
    server.wait().unwrap();
    assert_eq!(remote, stdout(&args));
}
