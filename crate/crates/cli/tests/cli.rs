use std::path::{Path, PathBuf};
use std::process::Command;

use fsorelay_cli::*;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn read_config(name: &str) -> String {
    std::fs::read_to_string(config_path(name)).unwrap()
}

fn fsorelay() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fsorelay"))
}

#[test]
fn preset_files_equal_the_builtin_presets() {
    for (file, preset) in [("fig1.conf", Preset::Fig1), ("fig2.conf", Preset::Fig2), ("fig3.conf", Preset::Fig3)] {
        let spec = validate_config(&read_config(file)).unwrap();
        assert_eq!(spec, ExperimentSpec::preset(preset), "{file}");
    }
}

#[test]
fn annotated_example_is_valid() {
    let spec = validate_config(&read_config("example.conf")).unwrap();
    assert_eq!(spec.users, vec![1, 2, 4]);
    assert_eq!(spec.out.as_deref(), Some(Path::new("results.csv")));
}

#[test]
fn binary_writes_a_readable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let status = fsorelay()
        .args(["--preset", "fig3", "--relays", "2", "--gamma-avg-db", "10:10:20", "--trials", "5000"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let rows = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.closed_form.is_some() && r.quadrature.is_some() && r.mc.is_some()));
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1, "temporary file left behind");
}

#[test]
fn config_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("c.conf");
    std::fs::write(&conf, "users = 4\nmethods = quadrature\ngamma_avg_db = 30\n").unwrap();
    let output = fsorelay().arg("--config").arg(&conf).args(["--users", "1", "--mode", "unknown-csi"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let rows = read_csv(output.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].n_users, 1);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "users = 2\nxi = 1.0\n").unwrap();
    let output = fsorelay().arg("--config").arg(&conf).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&output.stderr);
    assert!(msg.contains("line 2") && msg.contains("xi"), "{msg}");
    assert_eq!(fsorelay().arg("--config").arg(dir.path().join("missing.conf")).output().unwrap().status.code(), Some(1));
    assert_eq!(fsorelay().args(["--gamma-avg-db", "40:5:0"]).output().unwrap().status.code(), Some(1));
}
