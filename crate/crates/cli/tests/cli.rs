// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn echoscope(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_echoscope"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: [&str; 4] = ["--n", "400", "--p-in", "0.05"];

fn small(extra: &[&str]) -> Vec<String> {
    SMALL.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run_ok(dir: &Path, args: &[String]) {
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = echoscope(dir, &args);
    assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
}

fn pipeline(dir: &Path) {
    run_ok(dir, &small(&["synth", "--out", "data"]));
    run_ok(dir, &small(&["ingest", "--tweets", "data/tweets.jsonl", "--bot-scores", "data/bot_scores.csv"]));
    for cmd in ["graph", "seed"] {
        run_ok(dir, &small(&["--degree-threshold", "3", "--lexicon", "data/lexicon.tsv", cmd]));
    }
    for cmd in ["train", "score", "eval"] {
        run_ok(dir, &small(&["--degree-threshold", "3", cmd]));
    }
}

#[test]
fn small_pipeline_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    run_ok(dir, &small(&["--walks", "2000", "analyze", "rwc"]));
    run_ok(dir, &small(&["--walks", "2000", "report", "--out", "out"]));
    for f in ["users.jsonl", "retweet_edges.csv", "pagerank.csv", "seeds.csv", "model.bin", "polarity.csv", "eval.json"] {
        assert!(dir.join("work").join(f).is_file(), "missing {f}");
    }
    for f in ["rwc.csv", "rwc.json", "rwc.svg", "analyze_rwc.manifest.json"] {
        assert!(dir.join("work/analysis").join(f).is_file(), "missing {f}");
    }
    for a in ["roles", "influence", "audience", "rwc", "popular"] {
        assert!(dir.join("out").join(format!("{a}.csv")).is_file());
        assert!(dir.join("out").join(format!("{a}.json")).is_file());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/report.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["stage"], "report");
    assert_eq!(manifest["config"]["walks"], 2000);
    let text = manifest.to_string();
    assert!(!text.contains(&dir.to_string_lossy().into_owned()), "absolute path leaked into the report");
}

#[test]
fn stage_before_its_inputs_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, needs) in [("graph", "ingest"), ("train", "graph"), ("score", "train"), ("report", "graph")] {
        let out = echoscope(tmp.path(), &[cmd]);
        assert_eq!(code(&out), 2, "{cmd}");
        assert!(stderr(&out).contains(&format!("echoscope {needs}")), "{cmd}: {}", stderr(&out));
    }
    let out = echoscope(tmp.path(), &["analyze", "popular"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_flags_and_settings_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(code(&echoscope(dir, &["--no-such-flag", "graph"])), 2);
    assert_eq!(code(&echoscope(dir, &["--walks", "0", "synth", "--out", "d"])), 2);
    assert_eq!(code(&echoscope(dir, &["--sampling", "three_neg", "synth", "--out", "d"])), 2);
    let both = ["--authoritative-count", "3", "--authoritative-fraction", "0.1", "synth", "--out", "d"];
    assert_eq!(code(&echoscope(dir, &both)), 2);
    fs::write(dir.join("bad.conf"), "wlaks = 10\n").unwrap();
    assert_eq!(code(&echoscope(dir, &["--config", "bad.conf", "synth", "--out", "d"])), 2);
    assert!(!dir.join("d").exists());
    assert_eq!(code(&echoscope(dir, &["--help"])), 0);
}

#[test]
fn malformed_input_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("tweets.jsonl"), "{\"not\": \"a tweet\"}\n").unwrap();
    let out = echoscope(dir, &["ingest", "--tweets", "tweets.jsonl"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = echoscope(dir, &["ingest", "--tweets", "missing.jsonl"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn changed_tweets_are_detected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    run_ok(dir, &small(&["synth", "--out", "data"]));
    run_ok(dir, &small(&["ingest", "--tweets", "data/tweets.jsonl"]));
    let mut text = fs::read_to_string(dir.join("data/tweets.jsonl")).unwrap();
    text.truncate(text.len() / 2);
    text.truncate(text.rfind('\n').unwrap() + 1);
    fs::write(dir.join("data/tweets.jsonl"), text).unwrap();
    let out = echoscope(dir, &["graph"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("changed since ingest"));
}

#[test]
fn config_file_and_manifest_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("run.conf"), "# small run\nn = 400\np-in = 0.05\nseed = 7\n").unwrap();
    let out = echoscope(dir, &["--config", "run.conf", "synth", "--out", "a"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = echoscope(dir, &["--config", "a/synth.manifest.json", "synth", "--out", "b"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["tweets.jsonl", "ground_truth.csv", "synth.manifest.json"] {
        assert_eq!(fs::read(dir.join("a").join(f)).unwrap(), fs::read(dir.join("b").join(f)).unwrap(), "{f}");
    }
    // a flag overrides the file
    let out = echoscope(dir, &["--config", "run.conf", "--seed", "8", "synth", "--out", "c"]);
    assert_eq!(code(&out), 0);
    assert_ne!(fs::read(dir.join("a/tweets.jsonl")).unwrap(), fs::read(dir.join("c/tweets.jsonl")).unwrap());
}
