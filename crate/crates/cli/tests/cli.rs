use std::fs;
use std::path::Path;
use std::process::Command;

use aham_cli::{run_example, Format, HChoice, RunConfig};

fn aham(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_aham")).args(args).output().unwrap()
}

/// Data rows of a CSV table as numbers, skipping `#` lines and the column header.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn header(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn classic_ham_value_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = aham(&["--example", "4.1", "--h", "-1", "--terms", "3", "--mode", "classic", "--out", out]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let density = rows(&dir.path().join("4.1_density.csv"));
    let row = density.iter().find(|r| r[0] == 5.0 && r[1] == 0.5).unwrap();
    assert!((row[2] - 1.16686e-2).abs() <= 1e-3 * 1.16686e-2, "{}", row[2]);
    // fixed h writes no optimizer report
    assert!(!dir.path().join("4.1_h_report.csv").exists());
}

#[test]
fn breakage_error_norm_falls_with_terms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        example: "4.6".into(),
        terms: Some(4),
        residual_grid: Some((20, 10.0, 1.0)),
        out: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    run_example(&cfg).unwrap();
    let errors = rows(&dir.path().join("4.6_error_norm.csv"));
    let at_half: Vec<f64> = errors.iter().filter(|r| r[2] == 0.5).map(|r| r[3]).collect();
    assert_eq!(at_half.len(), 4);
    assert!(at_half.windows(2).all(|w| w[1] < w[0]), "{at_half:?}");
    assert!(dir.path().join("4.6_h_report.csv").exists());
}

#[test]
fn brownian_example_uses_the_finite_volume_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        example: "4.5".into(),
        h: HChoice::Fixed(-1.0),
        out: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    run_example(&cfg).unwrap();
    let path = dir.path().join("4.5_density.csv");
    assert!(header(&path).iter().any(|l| l.starts_with("# reference: fvm, 400")));
    let density = rows(&path);
    assert!(density.iter().all(|r| r[3].is_finite()));
    assert!(density.iter().any(|r| r[3] > 0.1));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let run = aham(&["--example", "4.2", "--terms", "2", "--out", dir.path().to_str().unwrap()]);
        assert!(run.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn every_table_carries_the_metadata_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        example: "4.3".into(),
        out: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let paths = run_example(&cfg).unwrap();
    assert_eq!(paths.len(), 4);
    let hash = format!("# config_hash: {}", cfg.hash());
    for p in &paths {
        let head = header(p);
        for key in ["# config_hash:", "# h:", "# residual_grid:", "# error_grid:", "# term_cap:", "# terms:"] {
            assert!(head.iter().any(|l| l.starts_with(key)), "{key} missing in {p:?}");
        }
        assert!(head.contains(&hash));
    }
}

#[test]
fn json_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        example: "4.1".into(),
        h: HChoice::Fixed(-0.8),
        format: Format::Json,
        out: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    run_example(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("4.1_moments.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["metadata"]["h"]["value"], serde_json::json!(-0.8));
    assert_eq!(v["columns"], serde_json::json!(["tau", "j", "approx", "reference"]));
    // first row: τ = 0, j = 0, both sides equal the initial count 1
    assert_eq!(v["rows"][0], serde_json::json!([0.0, 0, 1.0, 1.0]));
}

#[test]
fn bad_input_fails_cleanly() {
    let run = aham(&["--example", "9.9", "--out", "/tmp"]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("unknown example"));
    let run = aham(&["--example", "4.1", "--h", "-1", "--optimize-h"]);
    assert!(!run.status.success());
    let run = aham(&["--example", "4.1", "--h-bracket", "-2"]);
    assert!(!run.status.success());
}
