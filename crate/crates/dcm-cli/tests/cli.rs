//! End-to-end CLI checks against the built binary.

use std::path::PathBuf;
use std::process::Command;

fn dcm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dcm"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn smoke_config_completes_quickly_with_outputs() {
    let work = std::env::temp_dir().join(format!("dcm_cli_smoke_{}", std::process::id()));
    std::fs::create_dir_all(&work).unwrap();
    let t0 = std::time::Instant::now();
    let out = dcm()
        .args(["run", config("smoke.json").to_str().unwrap()])
        .current_dir(&work)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(t0.elapsed().as_secs() < 30, "smoke run took {:?}", t0.elapsed());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("level 0"), "stdout: {stdout}");
    // outputs land in the config's output_dir, relative to the working dir
    assert!(work.join("out/smoke/report.json").exists());
    assert!(work.join("out/smoke/pointcloud.csv").exists());
    std::fs::remove_dir_all(&work).ok();
}

#[test]
fn dry_run_validates_without_writing() {
    let out = dcm()
        .args(["run", config("case1.json").to_str().unwrap(), "--dry-run"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("config ok"));
}

#[test]
fn check_rejects_broken_config_with_exit_code_2() {
    let dir = std::env::temp_dir();
    let bad = dir.join(format!("dcm_bad_{}.json", std::process::id()));
    let text = std::fs::read_to_string(config("smoke.json")).unwrap();
    std::fs::write(&bad, text.replace("\"weight\": 1.0", "\"weight\": -1.0")).unwrap();
    let out = dcm().args(["check", bad.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weights must be positive"));
    std::fs::remove_file(bad).ok();
}

#[test]
fn level_override_out_of_range_is_rejected() {
    let out = dcm()
        .args(["run", config("case1.json").to_str().unwrap(), "--level", "7", "--dry-run"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
}

#[test]
fn every_shipped_config_validates() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let out = dcm().args(["check", path.to_str().unwrap()]).output().unwrap();
            assert!(out.status.success(), "{path:?}: {}", String::from_utf8_lossy(&out.stderr));
            n += 1;
        }
    }
    assert!(n >= 8, "expected the shipped configs, found {n}");
}
