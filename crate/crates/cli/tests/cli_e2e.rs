//! End-to-end exercises of the compiled binary: the full pipeline chain,
//! determinism contracts, rejection reporting, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_medresponse"))
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let out = bin().args(args).current_dir(dir).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn full_pipeline_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    run_ok(
        &["simulate", "--participants", "6", "--instances", "6", "--seed", "11", "--out", "cohort"],
        d,
    );
    assert!(d.join("cohort/instances.jsonl").exists());
    assert!(d.join("cohort/manifest.json").exists());
    assert!(d.join("cohort/regimens.csv").exists());

    // Byte-identical cohort for the same seed.
    run_ok(
        &["simulate", "--participants", "6", "--instances", "6", "--seed", "11", "--out", "cohort2"],
        d,
    );
    assert_eq!(
        std::fs::read(d.join("cohort/instances.jsonl")).unwrap(),
        std::fs::read(d.join("cohort2/instances.jsonl")).unwrap(),
        "same seed must produce byte-identical cohorts"
    );

    run_ok(
        &["ingest", "cohort/instances.jsonl", "--out", "instances.jsonl"],
        d,
    );
    let pair_out = run_ok(
        &["pair", "--in", "instances.jsonl", "--window", "30:180", "--out", "pairs.jsonl"],
        d,
    );
    let pair_msg = String::from_utf8_lossy(&pair_out.stdout);
    assert!(pair_msg.contains("(18 pairs"), "pair yield: {pair_msg}");

    run_ok(
        &["extract", "--in", "pairs.jsonl", "--out", "features.csv", "--registry", "registry.json"],
        d,
    );
    let registry: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("registry.json")).unwrap()).unwrap();
    assert_eq!(registry["features"].as_array().unwrap().len(), 297);

    let train_out = run_ok(
        &[
            "train", "--features", "features.csv", "--trees", "40", "--seed", "5", "--model",
            "forest.bin",
        ],
        d,
    );
    assert!(String::from_utf8_lossy(&train_out.stdout).contains("top 10 features"));
    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("forest.bin")).unwrap()).unwrap();
    assert_eq!(model["config"]["n_trees"], 40);
    assert_eq!(model["schema_version"], 1);

    let eval_args = [
        "evaluate",
        "--features",
        "features.csv",
        "--folds",
        "6",
        "--reps",
        "3",
        "--trees",
        "30",
        "--seed",
        "9",
        "--report",
        "report.json",
        "--diffs-csv",
        "diffs.csv",
    ];
    run_ok(&eval_args, d);
    for file in ["report.json", "report_metrics.csv", "report_importance.csv", "report_participants.csv", "diffs.csv"] {
        assert!(d.join(file).exists(), "{file} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["cv"]["repetitions"], 3);
    let acc = report["cv"]["accuracy"]["mean"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert_eq!(report["dataset"]["n_instances"], 36);
    assert_eq!(
        report["importance_ranking"].as_array().unwrap().len(),
        297,
        "full ranking in report"
    );

    // Determinism: same seed, byte-identical report, independent of
    // --threads.
    let first = std::fs::read(d.join("report.json")).unwrap();
    let mut rerun_args: Vec<&str> = eval_args.to_vec();
    rerun_args[12] = "report_rerun.json";
    run_ok(&rerun_args, d);
    let mut threaded: Vec<&str> = eval_args.to_vec();
    threaded[12] = "report_threads.json";
    threaded.extend_from_slice(&["--threads", "2"]);
    run_ok(&threaded, d);
    let rerun = std::fs::read(d.join("report_rerun.json")).unwrap();
    let with_threads = std::fs::read(d.join("report_threads.json")).unwrap();
    assert_eq!(first, rerun, "same seed must give a byte-identical report");
    assert_eq!(first, with_threads, "--threads must not change results");

    // LED computation plus the quadratic fit appended into the report.
    run_ok(
        &[
            "led",
            "--regimens",
            "cohort/regimens.csv",
            "--out",
            "led.csv",
            "--fit-quadratic",
            "--report",
            "report.json",
            "--min-instances",
            "3",
        ],
        d,
    );
    let led_csv = std::fs::read_to_string(d.join("led.csv")).unwrap();
    assert_eq!(led_csv.lines().count(), 7, "header + 6 participants");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert!(report["led_fit"]["c2"].is_number(), "fit appended to the report");
    let participants = std::fs::read_to_string(d.join("report_participants.csv")).unwrap();
    let first_row = participants.lines().nth(1).unwrap();
    assert!(
        !first_row.ends_with(','),
        "participants CSV should carry LED after the fit: {first_row}"
    );
}

#[test]
fn ingest_reports_rejections_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let good = r#"{"participant_id":"p1","started_at":"2026-03-02T08:00:00Z","label":"baseline","reaction":{"trials":[{"stimulus":1.0,"press":1.3,"release":1.5}]}}"#;
    std::fs::write(
        d.join("raw.jsonl"),
        format!("{good}\nnot json at all\n{{\"participant_id\":\"p2\"}}\n"),
    )
    .unwrap();

    let out = bin()
        .args(["ingest", "raw.jsonl", "--out", "clean.jsonl"])
        .current_dir(d)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("raw.jsonl:2"), "stderr: {stderr}");
    assert!(stderr.contains("raw.jsonl:3"), "stderr: {stderr}");
    let clean = std::fs::read_to_string(d.join("clean.jsonl")).unwrap();
    assert_eq!(clean.lines().count(), 1);
}

#[test]
fn ingest_with_zero_valid_instances_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.jsonl"), "nonsense\n").unwrap();
    let out = bin()
        .args(["ingest", "bad.jsonl", "--out", "clean.jsonl"])
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[E_INPUT]"));
}

#[test]
fn single_class_training_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(
        &["simulate", "--participants", "2", "--instances", "4", "--seed", "3", "--out", "cohort"],
        d,
    );
    run_ok(
        &["extract", "--in", "cohort/instances.jsonl", "--out", "features.csv"],
        d,
    );
    // Keep only baseline rows.
    let text = std::fs::read_to_string(d.join("features.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let baseline_only: Vec<&str> = lines.filter(|l| l.contains(",baseline,")).collect();
    std::fs::write(
        d.join("single.csv"),
        format!("{header}\n{}\n", baseline_only.join("\n")),
    )
    .unwrap();

    let out = bin()
        .args(["train", "--features", "single.csv", "--trees", "10", "--model", "m.json"])
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[E_CONTRACT]"));
}

#[test]
fn wav_referenced_audio_is_inlined_on_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // Minimal 16-bit mono PCM WAV: 8 samples at 8 kHz.
    let mut wav: Vec<u8> = Vec::new();
    wav.extend_from_slice(b"RIFF");
    wav.extend_from_slice(&(36u32 + 16).to_le_bytes());
    wav.extend_from_slice(b"WAVE");
    wav.extend_from_slice(b"fmt ");
    wav.extend_from_slice(&16u32.to_le_bytes());
    wav.extend_from_slice(&1u16.to_le_bytes());
    wav.extend_from_slice(&1u16.to_le_bytes());
    wav.extend_from_slice(&8000u32.to_le_bytes());
    wav.extend_from_slice(&16000u32.to_le_bytes());
    wav.extend_from_slice(&2u16.to_le_bytes());
    wav.extend_from_slice(&16u16.to_le_bytes());
    wav.extend_from_slice(b"data");
    wav.extend_from_slice(&16u32.to_le_bytes());
    for k in 0..8i16 {
        wav.extend_from_slice(&(k * 1000).to_le_bytes());
    }
    std::fs::write(d.join("v.wav"), wav).unwrap();
    std::fs::write(
        d.join("raw.jsonl"),
        r#"{"participant_id":"p1","started_at":"2026-03-02T08:00:00Z","label":"baseline","voice":"v.wav"}"#,
    )
    .unwrap();

    run_ok(&["ingest", "raw.jsonl", "--out", "clean.jsonl"], d);
    let clean = std::fs::read_to_string(d.join("clean.jsonl")).unwrap();
    assert!(clean.contains("\"sample_rate\":8000"), "audio must be inlined: {clean}");

    // Stereo is rejected with a line-level report, not a crash.
    let mut stereo = std::fs::read(d.join("v.wav")).unwrap();
    stereo[22] = 2;
    std::fs::write(d.join("s.wav"), stereo).unwrap();
    std::fs::write(
        d.join("raw2.jsonl"),
        r#"{"participant_id":"p1","started_at":"2026-03-02T08:00:00Z","label":"baseline","voice":"s.wav"}"#,
    )
    .unwrap();
    let out = bin()
        .args(["ingest", "raw2.jsonl", "--out", "clean2.jsonl"])
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mono"));
}

#[test]
fn config_file_supplies_defaults_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(
        &["simulate", "--participants", "4", "--instances", "4", "--seed", "2", "--out", "cohort"],
        d,
    );
    run_ok(
        &["extract", "--in", "cohort/instances.jsonl", "--out", "features.csv"],
        d,
    );
    std::fs::write(
        d.join("cfg.json"),
        r#"{"evaluate":{"folds":4,"repetitions":2,"trees":15,"seed":77}}"#,
    )
    .unwrap();

    run_ok(
        &["evaluate", "--config", "cfg.json", "--features", "features.csv", "--report", "r1.json"],
        d,
    );
    let r1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("r1.json")).unwrap()).unwrap();
    assert_eq!(r1["cv"]["folds"], 4);
    assert_eq!(r1["cv"]["repetitions"], 2);
    assert_eq!(r1["config"]["n_trees"], 15);
    assert_eq!(r1["config"]["seed"], 77);

    // Flag beats the config file.
    run_ok(
        &[
            "evaluate", "--config", "cfg.json", "--features", "features.csv", "--reps", "3",
            "--report", "r2.json",
        ],
        d,
    );
    let r2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("r2.json")).unwrap()).unwrap();
    assert_eq!(r2["cv"]["repetitions"], 3);
    assert_eq!(r2["cv"]["folds"], 4);
}
