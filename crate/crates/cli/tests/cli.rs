//! End-to-end tests of the qeforge binary.

use std::path::Path;
use std::process::{Command, Output};

fn qeforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qeforge"))
        .current_dir(dir)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const WORKED_SOURCE: &str = "중국 당국이 부인하지 않는 것으로 볼 때 가능성이 높다 .\n";
const WORKED_MT: &str =
    "Given that the Chinese authorities do not deny it , it is highly likely .\n";
const WORKED_PE: &str = "Given that the Chinese authorities do not deny it , chances are high .\n";
const WORKED_ALIGNMENT: &str = "0-3 1-4 2-7 3-5 3-6 4-8 5-8 6-0 7-13 8-11 8-12 9-14\n";
const WORKED_MT_TAGS: &str = "OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK \
                              BAD OK BAD OK BAD OK BAD OK OK OK\n";
const WORKED_SOURCE_TAGS: &str = "OK OK OK OK OK OK OK BAD BAD OK\n";

#[test]
fn build_p_produces_dataset_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let src: String = (0..40).map(|i| format!("src sentence number {i}\n")).collect();
    let tgt: String = (0..40).map(|i| format!("tgt sentence number {i} extended\n")).collect();
    std::fs::write(dir.join("src.txt"), src).unwrap();
    std::fs::write(dir.join("tgt.txt"), tgt).unwrap();

    let out = qeforge(
        dir,
        &[
            "build-p",
            "--parallel",
            "src.txt,tgt.txt",
            "--backend",
            "mock:seed=42",
            "--out",
            "d",
        ],
    );
    assert_ok(&out);
    for name in [
        "src.txt",
        "mt.txt",
        "pe.txt",
        "mt_tags.txt",
        "source_tags.txt",
        "alignments.txt",
        "ter.txt",
        "manifest.json",
    ] {
        assert!(dir.join("d/train").join(name).exists(), "missing {name}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.join("d/train/manifest.json"))).unwrap();
    assert_eq!(manifest["strategy"], "P");
    assert_eq!(manifest["records"], 40);
}

#[test]
fn ter_on_identical_files_reports_zero_mean() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("a.txt"), "some tokens here\nmore tokens\n").unwrap();
    let out = qeforge(
        dir,
        &[
            "ter", "--mt", "a.txt", "--pe", "a.txt", "--out", "t.txt", "--scripts", "s.txt",
        ],
    );
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("mean TER        0.00"), "{stdout}");
    assert_eq!(read(&dir.join("t.txt")), "0\n0\n");
    assert_eq!(read(&dir.join("s.txt")), "M:0:0,M:1:1,M:2:2\nM:0:0,M:1:1\n");
}

#[test]
fn tag_reproduces_the_worked_example_byte_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("source.txt"), WORKED_SOURCE).unwrap();
    std::fs::write(dir.join("mt.txt"), WORKED_MT).unwrap();
    std::fs::write(dir.join("pe.txt"), WORKED_PE).unwrap();
    std::fs::write(dir.join("alignments.txt"), WORKED_ALIGNMENT).unwrap();
    let out = qeforge(
        dir,
        &[
            "tag",
            "--source",
            "source.txt",
            "--mt",
            "mt.txt",
            "--pe",
            "pe.txt",
            "--alignments",
            "alignments.txt",
            "--out",
            "tags",
        ],
    );
    assert_ok(&out);
    let expected_mt: String = WORKED_MT_TAGS.split_whitespace().collect::<Vec<_>>().join(" ") + "\n";
    assert_eq!(read(&dir.join("tags/mt_tags.txt")), expected_mt);
    assert_eq!(read(&dir.join("tags/source_tags.txt")), WORKED_SOURCE_TAGS);
}

#[test]
fn config_file_and_flags_produce_identical_manifests() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mono: String = (0..30).map(|i| format!("reference sentence {i} with words\n")).collect();
    std::fs::write(dir.join("mono.txt"), mono).unwrap();
    std::fs::write(
        dir.join("run.json"),
        serde_json::json!({
            "mono": "mono.txt",
            "backend": "mock:seed=7",
            "lowercase": true,
            "iterations": 3,
            "out": "from-config"
        })
        .to_string(),
    )
    .unwrap();

    let out = qeforge(dir, &["build-m", "--config", "run.json"]);
    assert_ok(&out);
    let out = qeforge(
        dir,
        &[
            "build-m",
            "--mono",
            "mono.txt",
            "--backend",
            "mock:seed=7",
            "--lowercase",
            "--iterations",
            "3",
            "--out",
            "from-flags",
        ],
    );
    assert_ok(&out);
    assert_eq!(
        read(&dir.join("from-config/train/manifest.json")),
        read(&dir.join("from-flags/train/manifest.json"))
    );
    for name in ["mt_tags.txt", "source_tags.txt", "alignments.txt", "ter.txt"] {
        assert_eq!(
            read(&dir.join("from-config/train").join(name)),
            read(&dir.join("from-flags/train").join(name))
        );
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mono: String = (0..25).map(|i| format!("line {i} of the corpus body\n")).collect();
    std::fs::write(dir.join("mono.txt"), mono).unwrap();
    for out_dir in ["r1", "r2"] {
        let out = qeforge(
            dir,
            &[
                "build-m", "--mono", "mono.txt", "--backend", "mock:seed=42", "--out", out_dir,
            ],
        );
        assert_ok(&out);
    }
    for name in [
        "src.txt",
        "mt.txt",
        "pe.txt",
        "mt_tags.txt",
        "source_tags.txt",
        "alignments.txt",
        "ter.txt",
        "manifest.json",
    ] {
        assert_eq!(
            read(&dir.join("r1/train").join(name)),
            read(&dir.join("r2/train").join(name)),
            "{name} differs"
        );
    }
}

#[test]
fn align_train_and_align_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut src = String::new();
    let mut tgt = String::new();
    for _ in 0..20 {
        src.push_str("a b\na\nb\n");
        tgt.push_str("x y\nx\ny\n");
    }
    std::fs::write(dir.join("s.txt"), src).unwrap();
    std::fs::write(dir.join("t.txt"), tgt).unwrap();
    let out = qeforge(
        dir,
        &[
            "align-train",
            "--source",
            "s.txt",
            "--target",
            "t.txt",
            "--out",
            "fwd.model",
        ],
    );
    assert_ok(&out);
    let out = qeforge(
        dir,
        &[
            "align",
            "--model",
            "fwd.model",
            "--source",
            "s.txt",
            "--target",
            "t.txt",
            "--out",
            "links.txt",
        ],
    );
    assert_ok(&out);
    let links = read(&dir.join("links.txt"));
    assert_eq!(links.lines().next().unwrap(), "0-0 1-1");

    // A reverse model plus symmetrization also runs.
    let out = qeforge(
        dir,
        &[
            "align-train",
            "--source",
            "t.txt",
            "--target",
            "s.txt",
            "--out",
            "rev.model",
        ],
    );
    assert_ok(&out);
    let out = qeforge(
        dir,
        &[
            "align",
            "--model",
            "fwd.model",
            "--reverse-model",
            "rev.model",
            "--heuristic",
            "grow-diag-final-and",
            "--source",
            "s.txt",
            "--target",
            "t.txt",
            "--out",
            "links2.txt",
        ],
    );
    assert_ok(&out);
    assert_eq!(read(&dir.join("links2.txt")).lines().next().unwrap(), "0-0 1-1");
}

#[test]
fn evaluate_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("gold.txt"), "OK BAD OK\nBAD OK\n").unwrap();
    std::fs::write(dir.join("pred.txt"), "OK BAD OK\nBAD OK\n").unwrap();
    std::fs::write(dir.join("ter.txt"), "0.15\n0.35\n").unwrap();
    let out = qeforge(
        dir,
        &[
            "evaluate",
            "--pred-target",
            "pred.txt",
            "--gold-target",
            "gold.txt",
            "--ter",
            "ter.txt",
            "--out",
            "report.json",
        ],
    );
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Target MCC      1.0000"), "{stdout}");
    let report: serde_json::Value = serde_json::from_str(&read(&dir.join("report.json"))).unwrap();
    assert_eq!(report["target_mcc"], 1.0);
    assert!(report["source_mcc"].is_null());
    assert_eq!(report["per_bin"].as_array().unwrap().len(), 11);
}

#[test]
fn split_command_divides_records() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mono: String = (0..50).map(|i| format!("sentence {i} for splitting\n")).collect();
    std::fs::write(dir.join("mono.txt"), mono).unwrap();
    let out = qeforge(
        dir,
        &["build-m", "--mono", "mono.txt", "--backend", "mock:seed=1", "--out", "d"],
    );
    assert_ok(&out);
    let out = qeforge(
        dir,
        &[
            "split", "--dataset", "d/train", "--valid", "5", "--test", "5", "--seed", "9",
            "--out", "sp",
        ],
    );
    assert_ok(&out);
    for (split, lines) in [("train", 40), ("valid", 5), ("test", 5)] {
        let count = read(&dir.join("sp").join(split).join("pe.txt")).lines().count();
        assert_eq!(count, lines, "{split}");
    }
}

#[test]
fn mock_translate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("in.txt"), "alpha beta gamma delta\nshort line\n").unwrap();
    for out_name in ["o1.txt", "o2.txt"] {
        let out = qeforge(
            dir,
            &[
                "mock-translate",
                "--input",
                "in.txt",
                "--output",
                out_name,
                "--seed",
                "5",
                "--direction",
                "tgt-to-src",
            ],
        );
        assert_ok(&out);
    }
    assert_eq!(read(&dir.join("o1.txt")), read(&dir.join("o2.txt")));
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qeforge(tmp.path(), &["--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = qeforge(tmp.path(), &["build-m"]);
    assert_eq!(out.status.code(), Some(1), "missing required inputs");
    let out = qeforge(tmp.path(), &["ter", "--mt", "nope.txt", "--pe", "nope.txt"]);
    assert_eq!(out.status.code(), Some(1), "missing files are input errors");
}
