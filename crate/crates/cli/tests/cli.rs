//! End-to-end tests of the distmon binary: simulate -> run -> evaluate, the
//! epidemic trajectory output, and exit codes for the error classes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn distmon(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distmon"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "exit {:?}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn simulate_run_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path();

    let output = distmon(
        &[
            "simulate",
            "--people",
            "5",
            "--frames",
            "40",
            "--seed",
            "11",
            "--detections-out",
            "det.jsonl",
            "--truth-out",
            "gt.jsonl",
        ],
        path,
    );
    assert_success(&output);
    assert!(path.join("det.jsonl").exists());
    assert!(path.join("gt.jsonl").exists());

    let output = distmon(
        &[
            "run",
            "--detections",
            "det.jsonl",
            "--report",
            "rep.jsonl",
            "--events",
            "ev.jsonl",
            "--overlay",
            "ov.jsonl",
        ],
        path,
    );
    assert_success(&output);
    let summary: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("summary is JSON");
    assert_eq!(summary["total_frames"], 40);
    assert_eq!(summary["skipped_lines"], 0);

    let reports = fs::read_to_string(path.join("rep.jsonl")).unwrap();
    assert_eq!(reports.lines().count(), 40);
    let overlay = fs::read_to_string(path.join("ov.jsonl")).unwrap();
    assert_eq!(overlay.lines().count(), 40);

    // a noiseless stream scored against its own ground truth is perfect
    let output = distmon(
        &[
            "evaluate",
            "--predictions",
            "det.jsonl",
            "--truth",
            "gt.jsonl",
        ],
        path,
    );
    assert_success(&output);
    let metrics: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(metrics["average_precision"], 1.0);
    assert_eq!(metrics["false_negatives"], 0);
    assert_eq!(metrics["false_positives"], 0);
}

#[test]
fn run_is_deterministic_at_the_file_level() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path();

    assert_success(&distmon(
        &[
            "simulate",
            "--people",
            "6",
            "--frames",
            "50",
            "--noise",
            "1.0",
            "--miss-rate",
            "0.1",
            "--fp-rate",
            "0.4",
            "--seed",
            "21",
            "--detections-out",
            "det.jsonl",
            "--truth-out",
            "gt.jsonl",
        ],
        path,
    ));

    let run = |suffix: &str| {
        let report = format!("rep{suffix}.jsonl");
        let events = format!("ev{suffix}.jsonl");
        let output = distmon(
            &[
                "run",
                "--detections",
                "det.jsonl",
                "--report",
                &report,
                "--events",
                &events,
            ],
            path,
        );
        assert_success(&output);
        (
            fs::read(path.join(report)).unwrap(),
            fs::read(path.join(events)).unwrap(),
            output.stdout,
        )
    };

    let first = run("1");
    let second = run("2");
    assert_eq!(first, second);
}

#[test]
fn bad_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path();
    fs::write(path.join("det.jsonl"), "").unwrap();
    fs::write(path.join("bad.toml"), "confidence_treshold = 0.4\n").unwrap();

    let output = distmon(
        &[
            "run",
            "--detections",
            "det.jsonl",
            "--config",
            "bad.toml",
            "--report",
            "rep.jsonl",
            "--events",
            "ev.jsonl",
        ],
        path,
    );
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("configuration"));
}

#[test]
fn non_monotone_stream_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path();
    let lines = [
        r#"{"frame_id":5,"timestamp_ms":200,"x":0.0,"y":0.0,"w":10.0,"h":20.0,"confidence":0.9}"#,
        r#"{"frame_id":4,"timestamp_ms":160,"x":0.0,"y":0.0,"w":10.0,"h":20.0,"confidence":0.9}"#,
    ];
    fs::write(path.join("det.jsonl"), lines.join("\n")).unwrap();

    let output = distmon(
        &[
            "run",
            "--detections",
            "det.jsonl",
            "--report",
            "rep.jsonl",
            "--events",
            "ev.jsonl",
        ],
        path,
    );
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn missing_detections_file_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let output = distmon(
        &[
            "run",
            "--detections",
            "absent.jsonl",
            "--report",
            "rep.jsonl",
            "--events",
            "ev.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn epidemic_trajectory_is_emitted_and_conserves_population() {
    let dir = tempfile::tempdir().unwrap();
    let output = distmon(
        &[
            "epidemic",
            "--beta",
            "0.3",
            "--delta",
            "0.1",
            "--population",
            "10000",
            "--initial-infected",
            "10",
            "--k",
            "10",
            "--awareness",
            "short",
            "--dt",
            "0.05",
            "--steps",
            "400",
        ],
        dir.path(),
    );
    assert_success(&output);
    let lines: Vec<serde_json::Value> = String::from_utf8_lossy(&output.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 401);
    for state in &lines {
        let total = state["susceptible"].as_f64().unwrap()
            + state["infected"].as_f64().unwrap()
            + state["recovered"].as_f64().unwrap();
        assert!((total - 10_000.0).abs() / 10_000.0 < 1e-8);
        let a = state["awareness"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&a));
    }
}

#[test]
fn epidemic_rejects_bad_parameters_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let output = distmon(
        &[
            "epidemic",
            "--beta",
            "-0.3",
            "--delta",
            "0.1",
            "--population",
            "1000",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
}
