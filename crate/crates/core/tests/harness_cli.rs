use std::fs;
use std::path::{Path, PathBuf};

use monolab::harness::{parse_configs, read_records, run_cli_with, run_suite};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("monolab").chain(args.iter().copied());
    let code = run_cli_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"{
    "name": "small",
    "board": "builtin:tb8",
    "agents": [{"agent": "value"}, {"agent": "simple"}, {"agent": "random"}],
    "games_per_trial": 6,
    "trials": 2,
    "max_rounds": 60,
    "seed": 9,
    "event_logs": true,
    "novelty": {"generate": {"class": "AN", "difficulty": "easy"}}
}"#;

fn jsonl_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    v.sort();
    v
}

#[test]
fn run_report_and_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let (code, stdout, stderr) = cli(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("small"));
    assert_eq!(jsonl_files(&out).len(), 2);
    assert!(out.join("summary.txt").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);

    let (code, csv, _) = cli(&["report", "--in", out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, 0);
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("schema_version,config,row"));
    assert!(header.contains("PNWP") && header.contains("NDA") && header.contains("NRP"));
    assert!(csv.lines().any(|l| l.contains(",small,all,")));

    let (code, json, _) = cli(&["report", "--in", out.to_str().unwrap(), "--nrp-denominator", "baseline"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["reports"][0]["report"]["nrp_denominator"], "baseline");

    let logs = jsonl_files(&out.join("logs"));
    assert_eq!(logs.len(), 12);
    let (code, stdout, stderr) = cli(&["replay", "--log", logs[7].to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.starts_with("replay ok"));

    let text = fs::read_to_string(&logs[7]).unwrap();
    let tampered: String = text.replacen("\"round\":1,", "\"round\":2,", 1);
    assert_ne!(tampered, text);
    let bad = tmp.path().join("bad.jsonl");
    fs::write(&bad, tampered).unwrap();
    let (code, _, stderr) = cli(&["replay", "--log", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("replay mismatch"));
}

#[test]
fn missing_board_is_a_config_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{"board": "boards/nowhere.json", "trials": 1, "games_per_trial": 2}"#,
    );
    let (code, _, stderr) = cli(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("nowhere.json"), "{stderr}");
}

#[test]
fn bad_input_exits_one_and_help_exits_zero() {
    assert_eq!(cli(&["launch"]).0, 1);
    assert_eq!(cli(&["run"]).0, 1);
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), r#"{"trials": 1, "colour": "red"}"#);
    assert_eq!(cli(&["run", "--config", config.to_str().unwrap()]).0, 1);
    let (code, stdout, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("replay"));
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["report", "--in", empty.path().to_str().unwrap()]).0, 1);
}

#[test]
fn config_list_writes_one_record_per_trial() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"[
        {"name": "a", "board": "builtin:tb8", "trials": 5, "games_per_trial": 2, "max_rounds": 30, "agents": [{"agent": "simple"}, {"agent": "random"}]},
        {"name": "b", "board": "builtin:tb8", "trials": 5, "games_per_trial": 2, "max_rounds": 30, "agents": [{"agent": "random"}, {"agent": "random"}]},
        {"name": "c", "board": "builtin:tb8", "trials": 5, "games_per_trial": 2, "max_rounds": 30, "agents": [{"agent": "simple"}, {"agent": "simple"}, {"agent": "random"}]}
    ]"#;
    let config = write_config(tmp.path(), body);
    let out = tmp.path().join("out");
    let (code, _, stderr) = cli(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(jsonl_files(&out).len(), 15);
    let records = read_records(&out).unwrap();
    assert_eq!(records.len(), 15);
    assert!(records.iter().all(|r| r.games.len() == 2));
}

#[test]
fn failed_trials_are_marked_and_the_rest_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = parse_configs(
        r#"[
            {"name": "good", "board": "builtin:tb8", "trials": 2, "games_per_trial": 3, "max_rounds": 30},
            {"name": "broken", "board": "missing.json", "trials": 2, "games_per_trial": 3}
        ]"#,
        Some(tmp.path()),
    )
    .unwrap();
    let suite = run_suite(&configs, Some(tmp.path()), 1).unwrap();
    assert!(suite.records[0].iter().all(|r| !r.failed() && r.games.len() == 3));
    assert!(suite.records[1]
        .iter()
        .all(|r| r.failed() && r.header.error.as_deref().is_some_and(|e| e.contains("missing.json"))));
    assert!(suite.reports[0].1.is_ok());
    assert!(suite.summary.contains("broken"));
    assert_eq!(jsonl_files(tmp.path()).len(), 4);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let configs = parse_configs(
        r#"{"board": "builtin:tb8", "trials": 4, "games_per_trial": 3, "max_rounds": 40, "seed": 77,
            "agents": [{"agent": "value"}, {"agent": "simple"}, {"agent": "random"}]}"#,
        None,
    )
    .unwrap();
    let one = tempfile::tempdir().unwrap();
    let two = tempfile::tempdir().unwrap();
    run_suite(&configs, Some(one.path()), 1).unwrap();
    run_suite(&configs, Some(two.path()), 2).unwrap();
    let a = jsonl_files(one.path());
    let b = jsonl_files(two.path());
    assert_eq!(a.len(), 4);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
    assert_eq!(
        fs::read(one.path().join("summary.json")).unwrap(),
        fs::read(two.path().join("summary.json")).unwrap()
    );
}
