use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scimeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scimeta"))
        .args(args)
        .env_remove("SCIMETA_CONFIG")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixtures(dir: &Path, count: &str) {
    let out = scimeta(&[
        "fixtures",
        "--output",
        path(dir),
        "--count",
        count,
        "--unscientific",
        "0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn clean_corpus_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, output) = (tmp.path().join("in"), tmp.path().join("out"));
    fixtures(&input, "10");
    let out = scimeta(&[
        "pipeline",
        "--input",
        path(&input),
        "--output",
        path(&output),
        "--workers",
        "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(output.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["counts"]["total"], 10);
    assert_eq!(manifest["counts"]["scientific"], 10);
    assert_eq!(manifest["counts"]["flagged"], 0);
    for f in [
        "metadata.xml",
        "metadata.json",
        "metadata.db",
        "review_queue.jsonl",
    ] {
        assert!(output.join(f).is_file(), "{f}");
    }
}

#[test]
fn empty_directory_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let output = tmp.path().join("out");
    let out = scimeta(&[
        "pipeline",
        "--input",
        path(tmp.path()),
        "--output",
        path(&output),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(output.join("metadata.json").is_file());
    assert!(!output.join("metadata.xml").exists());
}

#[test]
fn corrupt_file_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, output) = (tmp.path().join("in"), tmp.path().join("out"));
    fixtures(&input, "3");
    fs::write(input.join("corrupt.pdf"), b"%PDF-1.4 garbage").unwrap();
    let out = scimeta(&[
        "pipeline",
        "--input",
        path(&input),
        "--output",
        path(&output),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let queue = fs::read_to_string(output.join("review_queue.jsonl")).unwrap();
    assert!(queue.contains("\"id\":\"corrupt\""), "{queue}");
}

#[test]
fn missing_input_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scimeta(&[
        "pipeline",
        "--input",
        path(&tmp.path().join("nope")),
        "--output",
        path(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_config_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.conf");
    fs::write(&cfg, "title_mode = sideways\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_scimeta"))
        .args(["classify", "--input", path(tmp.path())])
        .env("SCIMETA_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("title_mode"));
}

#[test]
fn eval_search_and_extract() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, output) = (tmp.path().join("in"), tmp.path().join("out"));
    fixtures(&input, "20");
    assert_eq!(
        scimeta(&[
            "pipeline",
            "--input",
            path(&input),
            "--output",
            path(&output)
        ])
        .status
        .code(),
        Some(0)
    );

    let truth = input.join("corpus.truth.jsonl");
    let report = tmp.path().join("report.json");
    let out = scimeta(&[
        "eval",
        "--input",
        path(&output),
        "--truth",
        path(&truth),
        "--splits",
        "10,20",
        "--output",
        path(&report),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    for f in [
        "title",
        "abstract",
        "keywords",
        "body_text",
        "conclusions",
        "references",
    ] {
        assert_eq!(report["overall"][f], 100.0, "{f}");
    }

    let out = scimeta(&[
        "eval",
        "--input",
        path(&output),
        "--truth",
        path(&truth),
        "--splits",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("100"));

    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(output.join("metadata.json")).unwrap()).unwrap();
    let title = record[0]["title"]["value"].as_str().unwrap().to_string();
    let word = title.split_whitespace().next().unwrap();
    let out = scimeta(&[
        "search",
        "--input",
        path(&output.join("metadata.db")),
        "--fields",
        "title",
        word,
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(record[0]["id"].as_str().unwrap()));

    let first = fs::read_dir(&input)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "spans"))
        .unwrap();
    let out = scimeta(&["extract", "--input", path(&first)]);
    assert_eq!(out.status.code(), Some(0));
    let ex: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(ex["fields"]["title"]["status"], "extracted");
}
