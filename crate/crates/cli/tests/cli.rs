use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use techdraw_core::*;

fn techdraw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_techdraw"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn predictions_from_truth(gt: &dataset::GroundTruth) -> PredictionSet {
    PredictionSet::new(
        gt.images
            .iter()
            .flat_map(|g| {
                g.objects.iter().map(|o| Prediction {
                    image: g.file_name.clone(),
                    class: o.class,
                    bbox: o.bbox,
                    confidence: 1.0,
                    transcript: Some(o.transcript.clone()),
                })
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn generate_evaluate_validate() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    let out = techdraw(&[
        "generate",
        "--n",
        "6",
        "--seed",
        "42",
        "--workers",
        "2",
        "--out",
        s(&ds),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = read_manifest(&ds).unwrap();
    assert_eq!(m.master_seed, 42);
    assert_eq!(m.images.len(), 6);

    let gt = read_ground_truth(&ds).unwrap();
    let pred = dir.path().join("pred.tsv");
    write_predictions(&predictions_from_truth(&gt), &pred).unwrap();
    let report_dir = dir.path().join("report");
    let out = techdraw(&[
        "evaluate",
        "--gt",
        s(&ds),
        "--pred",
        s(&pred),
        "--out",
        s(&report_dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("100.00%"), "{table}");
    assert!(table.contains("mAP@0.5 1.0000"), "{table}");
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(report_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["map"], 1.0);
    assert_eq!(json["detection_rate"], 100.0);
    assert!(report_dir.join("report.txt").exists());

    let empty = dir.path().join("empty.tsv");
    fs::write(&empty, "").unwrap();
    let out = techdraw(&["evaluate", "--gt", s(&ds), "--pred", s(&empty)]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success());
    assert!(table.contains("0.00%") && table.contains("n/a"), "{table}");

    let out = techdraw(&["validate", "--gt", s(&ds), "--regenerate", "--workers", "1"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let victim = ds.join("images").join(&m.images[2].file_name);
    let mut bytes = fs::read(&victim).unwrap();
    bytes[40] ^= 1;
    fs::write(&victim, bytes).unwrap();
    let out = techdraw(&["validate", "--gt", s(&ds)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&m.images[2].file_name));
}

#[test]
fn preset_with_n_is_a_usage_error_before_io() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    let out = techdraw(&[
        "generate",
        "--preset",
        "ds2000",
        "--n",
        "10",
        "--out",
        s(&ds),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!ds.exists());
    let out = techdraw(&["generate", "--out", s(&ds)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!ds.exists());
    let out = techdraw(&["generate", "--n", "3", "--mix", "0.5,0.2", "--out", s(&ds)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!ds.exists());
}

#[test]
fn invalid_predictions_fail() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    assert!(techdraw(&["generate", "--n", "1", "--out", s(&ds)])
        .status
        .success());
    let pred = dir.path().join("p.tsv");
    fs::write(
        &pred,
        "# techdraw-predictions v1\n000000.png\t4\t0\t0\t5\t5\t0.5\n",
    )
    .unwrap();
    let out = techdraw(&["evaluate", "--gt", s(&ds), "--pred", s(&pred)]);
    assert_eq!(out.status.code(), Some(1));
    fs::write(
        &pred,
        "# techdraw-predictions v1\nmissing.png\t1\t0\t0\t5\t5\t0.5\n",
    )
    .unwrap();
    let out = techdraw(&["evaluate", "--gt", s(&ds), "--pred", s(&pred)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.png"));
}

#[test]
fn preview_and_recognizer_set() {
    let dir = tempfile::tempdir().unwrap();
    let pv = dir.path().join("pv");
    let out = techdraw(&["preview", "--type", "2", "--k", "2", "--out", s(&pv)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(pv.join("preview_t2_001.png").exists());
    assert_eq!(
        fs::read_to_string(pv.join("preview_t2_000.txt"))
            .unwrap()
            .lines()
            .count(),
        40
    );
    assert_eq!(
        techdraw(&["preview", "--type", "4", "--out", s(&pv)])
            .status
            .code(),
        Some(2)
    );

    let rs = dir.path().join("rs");
    let out = techdraw(&["recognizer-set", "--n", "5", "--out", s(&rs)]);
    assert!(out.status.success());
    assert_eq!(read_recognizer_labels(&rs).unwrap().len(), 5);
    let again = techdraw(&["recognizer-set", "--n", "5", "--out", s(&rs)]);
    assert_eq!(again.status.code(), Some(1), "refuses to overwrite");
}

#[test]
fn config_file_feeds_generation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "seed = 5\nn = 3\nmix = [0.0, 1.0]\nclutter_distractors = [0, 0]\n",
    )
    .unwrap();
    let ds = dir.path().join("ds");
    let out = techdraw(&[
        "generate",
        "--config",
        s(&cfg),
        "--seed",
        "6",
        "--out",
        s(&ds),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = read_manifest(&ds).unwrap();
    assert_eq!(m.master_seed, 6);
    assert_eq!(m.count(ImageType::Clutter), 3);
    assert_eq!(m.config.clutter_distractors, (0, 0));

    fs::write(&cfg, "bogus = 1\n").unwrap();
    let out = techdraw(&[
        "generate",
        "--config",
        s(&cfg),
        "--n",
        "1",
        "--out",
        s(&dir.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
