use std::fs;
use std::path::Path;
use std::process::Command;

use isac_lab::config::Experiment;
use isac_lab::{load_config, presets, run_experiment, CliError, RunConfig};

const BIN: &str = env!("CARGO_BIN_EXE_isac-lab");

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

fn small(name: &str, trials: usize, out: &Path) -> RunConfig {
    let mut cfg = presets::preset(name).unwrap();
    cfg.apply_overrides(None, Some(trials), Some(out));
    cfg
}

#[test]
fn acf_bases_preset_echoes_frame_setup() {
    let cfg = presets::preset("acf-bases").unwrap();
    assert_eq!(cfg.experiment, Experiment::Acf);
    let acf = cfg.acf.as_ref().unwrap();
    assert_eq!(acf.constellation.order, Some(16));
    assert_eq!(acf.bases.len(), 5);
    for b in &acf.bases {
        assert_eq!(b.build().unwrap().size(), 1024);
    }
    let echoed = serde_json::to_value(cfg.resolved().unwrap()).unwrap();
    assert_eq!(echoed["acf"]["constellation"]["kind"], "qam");
}

#[test]
fn empty_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    fs::write(&path, "").unwrap();
    let err = load_config(&path).unwrap_err();
    assert!(matches!(err, CliError::Config { .. }));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn misspelled_key_is_rejected_by_name() {
    let text = presets::preset_text("acf-bases").unwrap().replace("\"trials\"", "\"trails\"");
    let err = RunConfig::from_json(&text).unwrap_err();
    match err {
        CliError::Config { field, .. } => assert_eq!(field.as_deref(), Some("trails")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn acf_bases_small_run_writes_one_csv_per_basis_and_a_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("acf-bases");
    let summary = run_experiment(&small("acf-bases", 10, &out), true).unwrap();
    let curves = summary.files.iter().filter(|f| f.starts_with("acf_") && f.ends_with(".csv")).count();
    let svgs = summary.files.iter().filter(|f| f.ends_with(".svg")).count();
    assert_eq!(curves, 5);
    assert_eq!(svgs, 1);
    let rows = read_csv(&out.join("acf_ofdm_k1.csv"));
    assert_eq!(rows.len(), 1024);
}

#[test]
fn acf_integration_floor_drops_about_twenty_db() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("acf-integration");
    run_experiment(&small("acf-integration", 60, &out), false).unwrap();
    let rows = read_csv(&out.join("summary.csv"));
    let floor = |k: &str| -> f64 { rows.iter().find(|r| r[1] == k).unwrap()[5].parse().unwrap() };
    let drop = floor("1") - floor("100");
    assert!((drop - 20.0).abs() < 1.5, "drop {drop}");
}

#[test]
fn v2i_preset_reports_calibrated_reductions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v2i");
    let mut cfg = presets::preset("paper-fr2-120khz").unwrap();
    cfg.apply_overrides(None, None, Some(&out));
    cfg.v2i.as_mut().unwrap().handover_seeds = 0;
    run_experiment(&cfg, false).unwrap();
    let rows = read_csv(&out.join("stages.csv"));
    let reduction = |stage: &str| -> f64 {
        let r = rows.iter().find(|r| r[0] == stage && r[1] == "sensing_assisted").unwrap();
        r[5].parse().unwrap()
    };
    assert!((reduction("initial_access") - 91.7).abs() < 0.05);
    assert!((reduction("beam_failure") - 50.0).abs() < 1e-9);
    assert!(out.join("events.jsonl").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_experiment(&small("rank-bases", 30, &a), false).unwrap();
    run_experiment(&small("rank-bases", 30, &b), false).unwrap();
    assert_eq!(fs::read(a.join("ranking.csv")).unwrap(), fs::read(b.join("ranking.csv")).unwrap());
    for d in [&a, &b] {
        let metas = fs::read_dir(d)
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name() == "metadata.json")
            .count();
        assert_eq!(metas, 1);
    }
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let ok = Command::new(BIN)
        .args(["run", "kurtosis-anchors", "--out"])
        .arg(dir.path().join("k"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"experiment\": \"acf\", \"trails\": 3}").unwrap();
    let cfg_err = Command::new(BIN).arg("run").arg(&bad).output().unwrap();
    assert_eq!(cfg_err.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&cfg_err.stderr).unwrap();
    assert_eq!(report["error"], "config");

    // A budget smaller than one trial makes the run itself fail.
    let mut cfg: serde_json::Value = serde_json::from_str(presets::preset_text("acf-integration").unwrap()).unwrap();
    cfg["acf"]["budget"] = serde_json::json!(1);
    cfg["output_dir"] = serde_json::json!(dir.path().join("budget"));
    let over = dir.path().join("budget.json");
    fs::write(&over, cfg.to_string()).unwrap();
    let rt_err = Command::new(BIN).arg("run").arg(&over).output().unwrap();
    assert_eq!(rt_err.status.code(), Some(2), "{}", String::from_utf8_lossy(&rt_err.stderr));
    let report: serde_json::Value = serde_json::from_slice(&rt_err.stderr).unwrap();
    assert_eq!(report["error"], "runtime");
}
