//! CLI surface: subcommands, artifacts, exit codes.

use std::path::Path;
use std::process::Command;

fn omc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omc"))
}

#[test]
fn infer_writes_all_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = omc()
        .args([
            "infer",
            "--problem",
            "mog_base",
            "--dim",
            "1",
            "--seeds",
            "30",
            "--candidates",
            "500",
            "--final",
            "200",
            "--master-seed",
            "3",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for file in ["samples.csv", "records.csv", "weighted.csv", "report.json"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
    let samples = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert!(samples.starts_with("# omc samples v1"));
    assert_eq!(samples.lines().count(), 2 + 200);
}

#[test]
fn unknown_problem_is_a_configuration_error() {
    let out = omc().args(["infer", "--problem", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_pcg_is_a_configuration_error() {
    let out = omc()
        .args(["infer", "--problem", "mog_base", "--pcg", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_results_file_is_an_inference_failure() {
    let out = omc()
        .args(["frontier", "--csv", "/nonexistent/results.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    let cfg = omc::harness::config::ExperimentConfig::for_problem("mog_base", 1).unwrap();
    std::fs::write(&cfg_path, cfg.to_json()).unwrap();
    let out_dir = dir.path().join("run-out");
    let out = omc()
        .args(["infer", "--config"])
        .arg(&cfg_path)
        .args([
            "--seeds",
            "25",
            "--candidates",
            "400",
            "--final",
            "100",
            "--epsilon",
            "0.2",
            "--out",
        ])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"seeds\": 25"), "flag should override the file");
    assert!(report.contains("\"epsilon\": 0.2"));
}

#[test]
fn sweep_then_plots_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = omc()
        .args([
            "sweep",
            "--problem",
            "mog_base",
            "--dims",
            "1",
            "--seeds-list",
            "200,400",
            "--reps",
            "2",
            "--final",
            "200",
            "--candidates",
            "2000",
            "--out",
        ])
        .arg(dir.path())
        .arg("--oracle-cache")
        .arg(dir.path().join("cache"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let results = dir.path().join("results.csv");
    assert!(results.exists());
    // the first budget solves this easy cell, so early stopping must leave
    // no rows at the higher budget
    let text = std::fs::read_to_string(&results).unwrap();
    let rows: Vec<&str> =
        text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("problem")).collect();
    assert_eq!(rows.len(), 2, "expected early stop after S=200: {text}");
    assert!(rows.iter().all(|r| r.contains(",200,")), "rows: {rows:?}");

    for (cmd, file) in [
        ("frontier", "frontier.svg"),
        ("heatmap", "heatmap.svg"),
        ("scatter", "scatter.svg"),
    ] {
        let svg_path = dir.path().join(file);
        let out = omc()
            .args([cmd, "--csv"])
            .arg(&results)
            .arg("--out")
            .arg(&svg_path)
            .output()
            .unwrap();
        assert!(out.status.success());
        let svg = std::fs::read_to_string(&svg_path).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn oracle_subcommand_writes_and_caches_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("oracle.csv");
    let cache = dir.path().join("cache");
    let run = |path: &Path| {
        omc()
            .args([
                "oracle",
                "--problem",
                "mog_base",
                "--dim",
                "2",
                "--count",
                "120",
                "--seed",
                "9",
                "--out",
            ])
            .arg(path)
            .arg("--oracle-cache")
            .arg(&cache)
            .output()
            .unwrap()
    };
    let first = run(&out_file);
    assert!(first.status.success());
    let text = std::fs::read_to_string(&out_file).unwrap();
    assert_eq!(text.lines().count(), 2 + 120);
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);

    // second call re-reads; identical bytes
    let out_file2 = dir.path().join("oracle2.csv");
    let second = run(&out_file2);
    assert!(second.status.success());
    assert_eq!(text, std::fs::read_to_string(&out_file2).unwrap());
}

#[test]
fn infer_is_byte_deterministic_across_invocations() {
    let run = |dir: &Path| {
        let out = omc()
            .args([
                "infer",
                "--problem",
                "two_moons",
                "--seeds",
                "50",
                "--candidates",
                "800",
                "--final",
                "200",
                "--master-seed",
                "11",
                "--out",
            ])
            .arg(dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(dir.join("samples.csv")).unwrap()
    };
    let dir = tempfile::tempdir().unwrap();
    let a = run(&dir.path().join("a"));
    let b = run(&dir.path().join("b"));
    assert_eq!(a, b);
}
