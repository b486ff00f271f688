use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn spellir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spellir"))
        .args(args)
        .env_remove("SPELLIR_OUT")
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    let out = spellir(&["synth", "--out", data.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    data
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn grid_writes_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let d = synth(tmp.path());
    let out = tmp.path().join("out");
    let r = spellir(&[
        "grid",
        "--queries", s(&d.join("queries.jsonl")),
        "--passages", s(&d.join("passages.jsonl")),
        "--judgments", s(&d.join("judgments.jsonl")),
        "--retriever", "bm25",
        "--method", "conservative,edit_distance",
        "--out", s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1 + 3 * 2);
    assert!(out.join("runs/bm25_exp4_edit_distance.run").exists());
    assert!(out.join("corrections/conservative.jsonl").exists());

    std::fs::remove_file(out.join("report.md")).unwrap();
    let r = spellir(&["report", "--out", s(&out)]);
    assert!(r.status.success());
    assert!(std::fs::read_to_string(out.join("report.md")).unwrap().contains("| bm25 |"));
}

#[test]
fn single_cell_and_env_override() {
    let tmp = tempfile::tempdir().unwrap();
    let d = synth(tmp.path());
    let out = tmp.path().join("cell");
    let r = Command::new(env!("CARGO_BIN_EXE_spellir"))
        .args(["run", "--condition", "exp3b", "--method", "edit_distance", "--retriever", "tfidf"])
        .env("SPELLIR_QUERIES", d.join("queries.jsonl"))
        .env("SPELLIR_PASSAGES", d.join("passages.jsonl"))
        .env("SPELLIR_JUDGMENTS", d.join("judgments.jsonl"))
        .env("SPELLIR_OUT", &out)
        .output()
        .unwrap();
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let stdout = String::from_utf8(r.stdout).unwrap();
    assert!(stdout.lines().nth(1).unwrap().starts_with("exp3b,edit_distance,tfidf,"));
    assert!(out.join("tfidf_exp3b_edit_distance.run").exists());
    assert!(out.join("corrections_edit_distance.jsonl").exists());
}

#[test]
fn census_vocab_index_correct_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let d = synth(tmp.path());
    let q = d.join("queries.jsonl");
    let p = d.join("passages.jsonl");

    let r = spellir(&["census", "--queries", s(&q), "--passages", s(&p), "--unpaired", s(&q)]);
    assert!(r.status.success());
    let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["census"]["total_queries"], 40);
    assert!(v["unpaired"]["calibrated"]["estimated_error_rate"].as_f64().unwrap() > 0.0);

    let vocab = tmp.path().join("vocab.tsv");
    assert!(spellir(&["build-vocab", "--passages", s(&p), "--out", s(&vocab)]).status.success());
    let text = std::fs::read_to_string(&vocab).unwrap();
    assert!(text.lines().all(|l| l.split('\t').count() == 2));

    let index = tmp.path().join("index.json");
    assert!(spellir(&["index", "--passages", s(&p), "--out", s(&index)]).status.success());
    assert!(index.exists());

    let corrected = tmp.path().join("corrected.jsonl");
    let r = spellir(&["correct", "--queries", s(&q), "--passages", s(&p), "--method", "symspell", "--out", s(&corrected)]);
    assert!(r.status.success());
    assert_eq!(std::fs::read_to_string(&corrected).unwrap().lines().count(), 40);

    let r = spellir(&["analyze", "--queries", s(&q), "--passages", s(&p), "--method", "conservative"]);
    assert!(r.status.success());
    let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["method"], "conservative");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = synth(tmp.path());
    let missing = tmp.path().join("nope.jsonl");
    let r = spellir(&[
        "run",
        "--queries", s(&d.join("queries.jsonl")),
        "--passages", s(&missing),
        "--judgments", s(&d.join("judgments.jsonl")),
        "--out", s(&tmp.path().join("o")),
    ]);
    assert_eq!(r.status.code(), Some(1));

    let r = spellir(&[
        "run",
        "--queries", s(&d.join("queries.jsonl")),
        "--passages", s(&d.join("passages.jsonl")),
        "--judgments", s(&d.join("judgments.jsonl")),
        "--k", "5",
        "--out", s(&tmp.path().join("o")),
    ]);
    assert_eq!(r.status.code(), Some(1));

    let bad = tmp.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\": \"q1\"}\n").unwrap();
    let r = spellir(&["census", "--queries", s(&bad), "--passages", s(&d.join("passages.jsonl"))]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 1"));

    // output path under a regular file cannot be created
    let file = tmp.path().join("file");
    std::fs::write(&file, "x").unwrap();
    let r = spellir(&["build-vocab", "--passages", s(&d.join("passages.jsonl")), "--out", s(&file.join("v.tsv"))]);
    assert_eq!(r.status.code(), Some(2));

    assert_eq!(spellir(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(spellir(&["--help"]).status.code(), Some(0));
}
