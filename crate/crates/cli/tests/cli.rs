mod common;

use std::collections::BTreeSet;
use std::path::Path;

use common::{fixture, read_json, run, run_ok, Server};
use sha2::{Digest, Sha256};

fn sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

fn toy() -> String {
    fixture("toy_corpus.jsonl").display().to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_writes_model_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["train", "--corpus", &toy(), "--out", path(dir.path()), "--seed", "42"]);
    assert!(dir.path().join("model.bin").is_file());
    assert!(dir.path().join("stats.json").is_file());
    let meta = read_json(&dir.path().join("train_metadata.json"));
    assert!(meta["training"]["vocabulary_size"].as_u64().unwrap() > 0);
    assert_eq!(meta["corpus_stats"]["records"], 3002);
    assert_eq!(meta["corpus_stats"]["skipped"]["malformed"], 1);
    assert_eq!(meta["corpus_stats"]["skipped"]["blank"], 1);
    assert_eq!(meta["corpus_stats"]["skipped"]["missing_text"], 1);
    // The resolved config carries defaults and the override.
    assert_eq!(meta["config"]["strict_TH"], 0.73);
    assert_eq!(meta["config"]["seed"], 42);
    assert!(meta["seconds"].is_f64());
}

#[test]
fn train_is_deterministic_for_a_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        run_ok(&["train", "--corpus", &toy(), "--out", path(dir.path()), "--seed", "42", "--workers", "1"]);
    }
    assert_eq!(sha256(&a.path().join("model.bin")), sha256(&b.path().join("model.bin")));
}

#[test]
fn missing_corpus_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["train", "--corpus", "/nonexistent/corpus.jsonl", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/corpus.jsonl"));
    assert!(!dir.path().join("model.bin").exists());
}

#[test]
fn usage_and_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"strict_TH": 1.5}"#).unwrap();
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"windw": 5}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["pipeline", "--corpus", "x", "--out", "y", "--mode", "loose"],
        vec!["frobnicate"],
        vec!["pipeline", "--config", path(&bad), "--dry-run"],
        vec!["pipeline", "--config", path(&unknown), "--dry-run"],
        vec!["pipeline", "--config", "/nonexistent/config.json", "--dry-run"],
        vec!["train", "--out", path(dir.path())],
        vec!["pipeline", "--dry-run", "--workers", "0"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = run(&["pipeline", "--config", path(&unknown), "--dry-run"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("windw"));
}

#[test]
fn dry_run_prints_resolved_config_only() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run_ok(&["pipeline", "--corpus", &toy(), "--out", path(&out_dir), "--mode", "open", "--dry-run"]);
    let echo: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(echo["config"]["mode"], "open");
    assert_eq!(echo["config"]["MAX_FREQ_RATIO"], 25.0);
    assert_eq!(echo["config_hash"].as_str().unwrap().len(), 16);
    assert!(!out_dir.exists());
}

fn surviving_ids(dir: &Path) -> (BTreeSet<String>, BTreeSet<String>) {
    let jsonl: BTreeSet<String> = std::fs::read_to_string(dir.join("families.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["family_id"].as_str().unwrap().to_owned())
        .collect();
    let mut reader = csv::Reader::from_path(dir.join("summary.csv")).unwrap();
    let csv: BTreeSet<String> = reader
        .records()
        .map(Result::unwrap)
        .filter(|r| &r[11] == "false")
        .map(|r| r[0].to_owned())
        .collect();
    (jsonl, csv)
}

#[test]
fn induce_strict_and_open() {
    let dir = tempfile::tempdir().unwrap();
    let model_dir = dir.path().join("model");
    run_ok(&["train", "--corpus", &toy(), "--out", path(&model_dir), "--seed", "42"]);
    let model = model_dir.join("model.bin");

    let strict = dir.path().join("strict");
    run_ok(&["induce", "--model", path(&model), "--out", path(&strict)]);
    let (jsonl, csv) = surviving_ids(&strict);
    assert!(!jsonl.is_empty());
    assert_eq!(jsonl, csv);
    let meta = read_json(&strict.join("induce_metadata.json"));
    assert_eq!(meta["config"]["mode"], "strict");
    assert_eq!(meta["families_written"], jsonl.len());

    let open = dir.path().join("open");
    run_ok(&["induce", "--model", path(&model), "--stats", path(&model_dir.join("stats.json")), "--out", path(&open), "--mode", "open"]);
    let text = std::fs::read_to_string(open.join("families.jsonl")).unwrap();
    for line in text.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(record["mode"], "open");
        let seed = record["seed"].as_str().unwrap();
        assert!(record["members"].as_array().unwrap().iter().any(|m| m["token"] == seed));
    }
    assert!(read_json(&open.join("induce_metadata.json"))["report"]["overlapping_tokens"].is_u64());
}

#[test]
fn pipeline_equals_train_then_induce() {
    let dir = tempfile::tempdir().unwrap();
    let whole = dir.path().join("whole");
    run_ok(&["pipeline", "--corpus", &toy(), "--out", path(&whole), "--seed", "42", "--workers", "1"]);
    let split = dir.path().join("split");
    run_ok(&["train", "--corpus", &toy(), "--out", path(&split), "--seed", "42", "--workers", "1"]);
    run_ok(&["induce", "--model", path(&split.join("model.bin")), "--out", path(&split), "--seed", "42"]);
    for file in ["model.bin", "stats.json", "families.jsonl", "summary.csv"] {
        assert_eq!(
            std::fs::read(whole.join(file)).unwrap(),
            std::fs::read(split.join(file)).unwrap(),
            "{file}"
        );
    }
    // Only the final files remain; no temporaries.
    let mut names: Vec<String> = std::fs::read_dir(&whole)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "families.jsonl",
            "induce_metadata.json",
            "model.bin",
            "stats.json",
            "summary.csv",
            "train_metadata.json"
        ]
    );
}

#[test]
fn config_file_paths_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let config = dir.path().join("config.json");
    let body = serde_json::json!({
        "corpus": toy(),
        "out": out_dir,
        "epochs": 3,
        "strict_th": 0.8,
        "min_users": 2,
    });
    std::fs::write(&config, body.to_string()).unwrap();
    run_ok(&["pipeline", "--config", path(&config), "--seed", "5"]);
    let meta = read_json(&out_dir.join("induce_metadata.json"));
    assert_eq!(meta["config"]["epochs"], 3);
    assert_eq!(meta["config"]["strict_TH"], 0.8);
    assert_eq!(meta["config"]["MIN_USERS"], 2);
    assert_eq!(meta["config"]["seed"], 5);
    assert!(meta["config"].get("corpus").is_none());
}

#[test]
fn bench_generate_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench");
    run_ok(&["bench", "generate", "--out", path(&bench), "--seed", "3", "--families", "5", "--records", "3000", "--users", "40", "--distractors", "40"]);
    // The bundled toy corpus is this output plus a few hand-written bad lines.
    let generated = std::fs::read(bench.join("corpus.jsonl")).unwrap();
    assert!(std::fs::read(fixture("toy_corpus.jsonl")).unwrap().starts_with(&generated));
    let run_dir = dir.path().join("run");
    run_ok(&["pipeline", "--corpus", path(&bench.join("corpus.jsonl")), "--out", path(&run_dir), "--seed", "42"]);
    let report_path = dir.path().join("report.json");
    let out = run_ok(&[
        "bench",
        "evaluate",
        "--families",
        path(&run_dir.join("families.jsonl")),
        "--truth",
        path(&bench.join("truth.json")),
        "--stats",
        path(&run_dir.join("stats.json")),
        "--out",
        path(&report_path),
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report, read_json(&report_path));
    assert!(report["metrics"]["pair_recall"].as_f64().unwrap() >= 0.6);
    assert_eq!(report["dominates_random_f1"], true);

    let out = run(&["bench", "generate", "--out", path(&bench), "--min-variants", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn serve_answers_and_shuts_down_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    run_ok(&["pipeline", "--corpus", &toy(), "--out", path(&run_dir), "--seed", "42"]);
    let families = run_dir.join("families.jsonl");
    let first_id = std::fs::read_to_string(&families).unwrap().lines().next().map(|l| {
        serde_json::from_str::<serde_json::Value>(l).unwrap()["family_id"].as_str().unwrap().to_owned()
    });
    let first_id = first_id.unwrap();
    let log = dir.path().join("annotations.jsonl");

    let server = Server::start(&families, &log);
    let (status, body) = server.request("GET", "/families", None);
    assert_eq!(status, 200);
    let page: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(page["page"], 1);
    let (status, _) = server.request(
        "PUT",
        &format!("/families/{first_id}/annotation"),
        Some(r#"{"categories":["Orthographic","Regional"],"annotator":"t"}"#),
    );
    assert_eq!(status, 200);
    assert!(server.terminate());

    let server = Server::start(&families, &log);
    let (_, body) = server.request("GET", &format!("/families/{first_id}"), None);
    let detail: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(detail["annotation"]["categories"], serde_json::json!(["Orthographic", "Regional"]));
    assert!(server.terminate());
}

#[test]
fn serve_reports_the_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    run_ok(&["pipeline", "--corpus", &toy(), "--out", path(&run_dir), "--seed", "42"]);
    let good = std::fs::read_to_string(run_dir.join("families.jsonl")).unwrap();
    let first = good.lines().next().unwrap();
    let mut lines: Vec<&str> = std::iter::repeat_n(first, 6).collect();
    lines.push("{\"family_id\": ");
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let out = run(&["serve", "--families", path(&bad), "--bind", "127.0.0.1:0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":7:"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn serve_fails_when_the_port_is_taken() {
    let dir = tempfile::tempdir().unwrap();
    let families = dir.path().join("families.jsonl");
    std::fs::write(&families, "").unwrap();
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let out = run(&["serve", "--families", path(&families), "--bind", &addr]);
    assert_eq!(out.status.code(), Some(2));
}
