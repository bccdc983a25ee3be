use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use hintlab_core::client::{EndpointTable, ModelClient};
use hintlab_core::dataset::{quiz_set, SubjectMix};
use hintlab_quiz::simulate::{Observed, Participant};
use hintlab_quiz::{MemoryStore, QuizService};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn hintlab(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hintlab")).args(args).env("RUST_LOG", "warn").output().unwrap();
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

async fn study_log(dir: &Path) -> PathBuf {
    let questions = quiz_set(data("quiz_set.jsonl"), &SubjectMix::study_default()).unwrap();
    let svc = QuizService::builder(Arc::new(ModelClient::from_table(EndpointTable::all_mock())))
        .questions(questions.clone())
        .store(Arc::new(MemoryStore::new()))
        .build()
        .unwrap();
    let p = Participant::new(&svc, &questions);
    for i in 0..3 {
        let id = p.join(&format!("p{i}"), Some(i)).await.unwrap();
        p.run(&id, None, &mut Observed::default()).await.unwrap();
    }
    let path = dir.join("study.jsonl");
    std::fs::write(&path, svc.export(None).await.unwrap()).unwrap();
    path
}

#[test]
fn stats_prints_the_dataset_summary() {
    let (ok, out, err) = hintlab(&["stats", "--dataset", data("sciq_sample.jsonl").to_str().unwrap(), "--label", "sample"]);
    assert!(ok, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("sample") && lines[1].contains(" 24 "), "{out}");
}

#[tokio::test]
async fn analyze_subcommands_read_an_exported_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = study_log(dir.path()).await;
    let log = log.to_str().unwrap();

    let (ok, out, err) = hintlab(&["analyze", "stats", "--log", log]);
    assert!(ok, "{err}");
    assert!(out.starts_with("sessions: 3\n"), "{out}");

    let (ok, csv, err) = hintlab(&["analyze", "stats", "--log", log, "--format", "csv"]);
    assert!(ok, "{err}");
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().all(|l| l.split(',').count() == 5));

    let (ok, out, err) = hintlab(&["analyze", "engagement", "--log", log, "--format", "csv"]);
    assert!(ok, "{err}");
    assert!(!out.is_empty());

    // no metric rows share a question with the quiz
    let rows = dir.path().join("rows.jsonl");
    std::fs::write(&rows, "").unwrap();
    let (ok, _, err) = hintlab(&["analyze", "align", "--log", log, "--metrics", rows.to_str().unwrap()]);
    assert!(!ok);
    assert!(err.contains("no study records share"), "{err}");
}

#[test]
fn assess_accuracy_reports_agreement() {
    let (ok, out, err) = hintlab(&[
        "assess",
        "accuracy",
        "--questions",
        data("quiz_set.jsonl").to_str().unwrap(),
        "--labels",
        data("labeled_submissions.jsonl").to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["total"], 36);
    assert!(report["unknown_questions"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_pareto_column_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (ok, _, err) = hintlab(&["bench", "pareto", "--out", dir.path().to_str().unwrap(), "--x", "Nope"]);
    assert!(!ok);
    assert!(!err.is_empty());
}
