use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const SPEC: &str = r#"{
  "n_records": 18000, "bot_fraction": 0.3,
  "human_process": {"name": "golden_mean"},
  "bot_process": {"name": "iid_uniform"},
  "human_bot_score": {"kind": "beta", "alpha": 2, "beta": 8},
  "bot_bot_score": {"kind": "uniform", "low": 0.6, "high": 1.0},
  "arrival_rate": 1.0, "seed": 5
}"#;

fn botdyn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_botdyn"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn botdyn")
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn hashes(dir: &Path) -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                let digest = hex::encode(Sha256::digest(fs::read(&p).unwrap()));
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), digest));
            }
        }
    }
    out.sort();
    out
}

fn simulated(dir: &Path) {
    fs::write(dir.join("spec.json"), SPEC).unwrap();
    ok(botdyn(&["simulate", "--spec", "spec.json", "--out", "corpus.csv"], dir));
}

#[test]
fn stages_compose_to_the_pipeline_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    simulated(dir);
    let summary = ok(botdyn(&["pipeline", "--input", "corpus.csv", "--out", "full"], dir));
    assert!(summary.contains("30 sequences"), "{summary}");

    ok(botdyn(&["bin", "--input", "corpus.csv", "--out", "staged"], dir));
    ok(botdyn(&["measures", "--out", "staged", "--jobs", "2"], dir));
    ok(botdyn(&["features", "--input", "corpus.csv", "--out", "staged"], dir));
    ok(botdyn(&["regress", "--out", "staged"], dir));
    assert_eq!(hashes(&dir.join("full")), hashes(&dir.join("staged")));

    let report = ok(botdyn(&["report", "full"], dir));
    assert!(report.contains("Model 1 (complexity)") && report.contains("Model 2 (entropy_rate)"));
    assert!(report.contains("bot_level"));
}

#[test]
fn config_file_and_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    simulated(dir);
    fs::write(
        dir.join("config.json"),
        r#"{"input": "corpus.csv", "strategy": {"kind": "rank_uniform"}, "emotions": ["joy"], "window_len": 1500}"#,
    )
    .unwrap();
    ok(botdyn(&["--config", "config.json", "pipeline", "--out", "b", "--L", "2"], dir));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("b/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["max_len"], 2);
    assert_eq!(manifest["n_sequences"], 12);
    assert!(dir.join("b/sequences/joy_0011_rank_uniform.txt").is_file());
    assert!(dir.join("b/machines/joy_0000_rank_uniform.json").is_file());
    let measures = fs::read_to_string(dir.join("b/measures.csv")).unwrap();
    assert_eq!(measures.lines().next().unwrap(), "emotion,window_index,strategy,C,h,E,n_states,error");
    for (path, digest) in manifest["artifacts"].as_object().unwrap() {
        let bytes = fs::read(dir.join("b").join(path)).unwrap();
        assert_eq!(digest.as_str().unwrap(), hex::encode(Sha256::digest(bytes)));
    }
}

#[test]
fn reconstruct_prints_machine_json() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    simulated(dir);
    ok(botdyn(&["bin", "--input", "corpus.csv", "--out", "b", "--emotion", "anger"], dir));
    let json = ok(botdyn(
        &["reconstruct", "--input", "b/sequences/anger_0000_quartile.txt", "--L", "3", "--alpha", "0.01", "--min-count", "5"],
        dir,
    ));
    let machine: serde_json::Value = serde_json::from_str(&json).unwrap();
    let states = machine["states"].as_array().unwrap();
    assert!(!states.is_empty());
    let pi: f64 = machine["stationary"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((pi - 1.0).abs() < 1e-9);
    for s in states {
        assert!(s["histories"].is_array() && s["next_dist"].is_array() && s["transitions"].is_array());
    }
}

#[test]
fn ingest_scores_texts_and_normalizes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("texts.txt"), "hello world\n\nanother  message here\n").unwrap();
    ok(botdyn(&["ingest", "--texts", "texts.txt", "--scorer", "constant:0.5", "--out", "scored.jsonl"], dir));
    let lines: Vec<serde_json::Value> = fs::read_to_string(dir.join("scored.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["word_count"], 2);
    assert_eq!(lines[0]["char_count"], 10);
    assert_eq!(lines[1]["word_count"], 0);
    assert_eq!(lines[2]["joy"], 0.5);

    let csv = ok(botdyn(&["ingest", "--input", "scored.jsonl"], dir));
    assert!(csv.starts_with("id,timestamp,anger"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("bad.csv"),
        "id,timestamp,anger,fear,sadness,joy,disgust,bot_score,word_count,char_count\na,0,0.1,0.1,0.1,0.1,0.1,1.5,1,1\n",
    )
    .unwrap();
    let out = botdyn(&["ingest", "--input", "bad.csv"], dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bot_score"));

    assert_eq!(botdyn(&["frobnicate"], dir).status.code(), Some(1));
    assert_eq!(botdyn(&["pipeline", "--input", "missing.csv", "--out", "o"], dir).status.code(), Some(1));
    assert_eq!(
        botdyn(&["pipeline", "--input", "bad.csv", "--out", "o", "--window-len", "4"], dir).status.code(),
        Some(1)
    );
    assert_eq!(botdyn(&["report", "nowhere"], dir).status.code(), Some(1));
    assert_eq!(botdyn(&["--help"], dir).status.code(), Some(0));
}
