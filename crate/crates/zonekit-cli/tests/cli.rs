use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn zonekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zonekit"))
        .args(args)
        .env("ZONEKIT_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_config(path: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["--config", path.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--quiet"];
    args.extend_from_slice(extra);
    zonekit(&args)
}

#[test]
fn verified_run_writes_summary_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("euclid_two_points.json");
    let o = run_config(&cfg, dir.path(), &["--verify", "--override", "resolution=[64,64]"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let summary: Value = serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], "zonekit.summary");
    assert_eq!(summary["version"], 1);
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["converged"], true);
    assert_eq!(summary["n_sites"], 2);
    assert_eq!(summary["grid"]["nx"], 64);
    for c in summary["checks"].as_array().unwrap() {
        assert_eq!(c["status"], "pass", "{c}");
    }
    for f in summary["files"].as_array().unwrap() {
        assert!(dir.path().join(f.as_str().unwrap()).is_file(), "{f}");
    }
    let svg = std::fs::read_to_string(dir.path().join("diagram.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("id=\"region-").count(), 2);
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("reports/cone.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn checks_are_skipped_without_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("lp15_two_points.json");
    let o = run_config(&cfg, dir.path(), &["--override", "resolution=[48,48]"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: Value = serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary["checks"].as_array().unwrap().iter().all(|c| c["status"] == "skipped"));
    assert!(!dir.path().join("reports").exists());
}

#[test]
fn failed_check_exits_one_and_names_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("euclid_two_points.json");
    let o = run_config(&cfg, dir.path(), &["--verify", "--override", "resolution=[64,64]", "--override", "max_iter=1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("check convergence failed"), "{err}");
    assert!(err.contains("summary.json"), "{err}");
}

#[test]
fn bad_config_exits_two_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        "{\n  \"norm\": {\"kind\": \"euclidean\"},\n  \"sites\": [{\"points\": [[0,0]]}, {\"points\": [[1,0]]}],\n  \"window\": [-4,-4,4,4],\n  \"resolution\": [16, 16]\n}\n",
    )
    .unwrap();
    let o = run_config(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.json:5:"), "{err}");
    assert!(err.contains("resolution"), "{err}");
}

#[test]
fn malformed_override_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("euclid_two_points.json");
    let o = run_config(&cfg, dir.path(), &["--override", "resolution"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn every_shipped_config_loads() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            zonekit_cli::RunConfig::load(&path, &[]).unwrap_or_else(|e| panic!("{e}"));
        }
    }
}
