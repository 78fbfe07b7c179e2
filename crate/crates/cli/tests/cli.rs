//! Subcommand contracts: artifacts written, exit codes, rerun determinism,
//! and report assembly.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_playstyle")
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(
        &path,
        r#"{
            "n_shot_clusters": 3,
            "mcmc": {"chains": 2, "warmup": 300, "draws": 200, "seed": 3},
            "synth": {"archetypes": 3, "players": 30, "shots_per_player": 30,
                      "teams": 3, "lineups_per_team": 20, "planted_pair": [0, 2]}
        }"#,
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(bin()).args(args).output().expect("spawn")
}

fn run_ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_writes_four_data_files_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "synth",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    for name in ["segments.csv", "playtypes.csv", "lineups.csv", "truth.json"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert!(!a.is_empty(), "{name} empty");
        assert_eq!(a, b, "{name} differs between identical invocations");
    }
    // manifests record every artifact with a content hash
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("manifest_synth.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 4);
}

#[test]
fn missing_config_exits_two_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "synth",
        "--config",
        "/nonexistent/cfg.json",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/cfg.json"), "{stderr}");
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"not_a_key": true}"#).unwrap();
    let out = run(&[
        "synth",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_segments_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let data = dir.path().join("data");
    std::fs::create_dir_all(&data).unwrap();
    std::fs::write(
        data.join("segments.csv"),
        "player_id,t,x,y,ball_held,shot_frame,is_three\n",
    )
    .unwrap();
    let out = run(&[
        "cluster-shots",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn features_stage_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let data = dir.path().join("data");
    run_ok(&[
        "synth",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        data.to_str().unwrap(),
    ]);
    let out = dir.path().join("feat");
    run_ok(&[
        "features",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    for name in ["features.csv", "pca_model.json", "role_features.csv"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
}

#[test]
fn cluster_roles_memberships_sum_to_one_and_histogram_covers_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let data = dir.path().join("data");
    run_ok(&[
        "synth",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "2",
        "--out",
        data.to_str().unwrap(),
    ]);
    let out = dir.path().join("roles");
    run_ok(&[
        "cluster-roles",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "5",
    ]);

    let mut reader = csv::Reader::from_path(out.join("memberships.csv")).unwrap();
    let width = reader.headers().unwrap().len();
    let c = width - 2;
    assert_eq!(c, 10, "default role cluster count");
    for record in reader.records() {
        let record = record.unwrap();
        let sum: f64 = (1..=c).map(|i| record[i].parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9, "membership row sums to {sum}");
    }

    let mut reader = csv::Reader::from_path(out.join("membership_histogram.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(&rows[0][0], "0");
    assert_eq!(&rows[9][1], "1");
    let total: usize = rows.iter().map(|r| r[2].parse::<usize>().unwrap()).sum();
    assert_eq!(total, 30);
}

#[test]
fn fit_exit_codes_and_report_assembly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let data = dir.path().join("data");
    let run_dir = dir.path().join("run");
    run_ok(&[
        "synth",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        data.to_str().unwrap(),
    ]);
    run_ok(&[
        "cluster-shots",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        run_dir.to_str().unwrap(),
    ]);

    // an unreachable threshold forces the convergence failure path
    let strict = dir.path().join("strict.json");
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("\"n_shot_clusters\": 3,", "\"n_shot_clusters\": 3, \"rhat_threshold\": 0.5,");
    std::fs::write(&strict, text).unwrap();
    let out = run(&[
        "fit",
        "--config",
        strict.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--clusters",
        run_dir.to_str().unwrap(),
        "--mode",
        "combos2",
        "--out",
        run_dir.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(3), "expected convergence failure");
    assert!(run_dir.join("diagnostics.json").exists());
    assert!(
        !run_dir.join("effects.csv").exists(),
        "effects.csv must be withheld without --force"
    );

    // --force emits the effects with the warning flag set
    let out = run(&[
        "fit",
        "--config",
        strict.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--clusters",
        run_dir.to_str().unwrap(),
        "--mode",
        "combos2",
        "--out",
        run_dir.to_str().unwrap(),
        "--seed",
        "3",
        "--force",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(run_dir.join("effects.csv").exists());
    let diagnostics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("diagnostics.json")).unwrap())
            .unwrap();
    assert_eq!(diagnostics["converged"], serde_json::Value::Bool(false));
    assert_eq!(diagnostics["forced"], serde_json::Value::Bool(true));

    // counts5 fit produces the metrics schema
    run_ok(&[
        "fit",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--clusters",
        run_dir.to_str().unwrap(),
        "--mode",
        "counts5",
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("metrics.json")).unwrap())
            .unwrap();
    for key in ["rmse", "mae", "nll"] {
        assert!(metrics[key].is_number(), "metrics.json missing {key}");
    }

    // report: missing artifacts are listed, then assembly succeeds
    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let out = run(&["report", "--out", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("assignments.csv"), "{stderr}");

    run_ok(&["report", "--out", run_dir.to_str().unwrap()]);
    let report = std::fs::read_to_string(run_dir.join("report.md")).unwrap();
    for section in [
        "## Cluster sizes",
        "## Silhouette sweep",
        "## Top and bottom lineups by baseline prediction",
        "## Estimated combination effects",
    ] {
        assert!(report.contains(section), "missing section {section}");
    }
    // the forced non-converged fit carries its warning into the report
    assert!(report.contains("WARNING"), "non-convergence warning missing");

    // regeneration is idempotent
    let before = std::fs::read(run_dir.join("report.md")).unwrap();
    run_ok(&["report", "--out", run_dir.to_str().unwrap()]);
    let after = std::fs::read(run_dir.join("report.md")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn thirteen_cluster_cut_yields_thirteen_labels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg13.json");
    std::fs::write(
        &cfg,
        r#"{
            "n_shot_clusters": 13,
            "synth": {"archetypes": 4, "players": 40, "shots_per_player": 30,
                      "teams": 4, "lineups_per_team": 5}
        }"#,
    )
    .unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("run");
    run_ok(&[
        "synth",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "13",
        "--out",
        data.to_str().unwrap(),
    ]);
    run_ok(&[
        "cluster-shots",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let mut reader = csv::Reader::from_path(out.join("assignments.csv")).unwrap();
    let mut labels: Vec<usize> = reader
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    labels.sort_unstable();
    labels.dedup();
    assert_eq!(labels.len(), 13, "expected exactly 13 distinct cluster labels");
}

#[test]
fn build_design_rows_conserve_combination_mass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let data = dir.path().join("data");
    let run_dir = dir.path().join("run");
    run_ok(&[
        "synth",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        data.to_str().unwrap(),
    ]);
    run_ok(&[
        "cluster-shots",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    run_ok(&[
        "build-design",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--clusters",
        run_dir.to_str().unwrap(),
        "--mode",
        "combos2",
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    let mut reader = csv::Reader::from_path(run_dir.join("design.csv")).unwrap();
    let width = reader.headers().unwrap().len();
    let mut n = 0;
    for record in reader.records() {
        let record = record.unwrap();
        let sum: f64 = (2..width - 1).map(|i| record[i].parse::<f64>().unwrap()).sum();
        assert!((sum - 10.0).abs() < 1e-9, "design row sums to {sum}");
        n += 1;
    }
    assert!(n > 0);
    assert!(run_dir.join("merge_map.json").exists());
}
