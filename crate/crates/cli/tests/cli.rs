//! End-to-end tests of the `qnd` binary: exit codes, emitted files,
//! reproducibility across worker counts, and meta-file round-trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qnd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qnd"))
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("qnd_cli_tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn species_table_with_constants() {
    let out = tmpdir("species");
    let output = run(qnd().args(["species", "Sr87", "--out"]).arg(&out));
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("-3.4"), "{stdout}");
    assert!(stdout.contains("39"), "{stdout}");
    let csv = read(&out.join("species.csv"));
    assert!(csv.starts_with("label,key,J,I,A_MHz,Q_MHz,Gamma_MHz"));
    assert!(csv.contains("5s5p 1P1,1P1,1,9/2,-3.4,39,32"));
    assert!(out.join("species.meta.json").exists());
}

#[test]
fn two_level_single_point_value() {
    let out = tmpdir("two_level");
    let output = run(qnd()
        .args(["two-level", "--gamma-mhz", "32", "--delta-over-gamma", "1", "--out"])
        .arg(&out));
    assert!(output.status.success());
    let csv = read(&out.join("two-level.csv"));
    let row = csv.lines().nth(1).unwrap();
    let infidelity: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((infidelity - 0.25).abs() < 1e-3, "infidelity {infidelity}");
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let output = run(qnd().arg("frobnicate"));
    assert_eq!(output.status.code(), Some(2));
    let output = run(qnd().args(["two-level", "--bogus-flag"]));
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn schema_violation_exits_one_with_diagnostic() {
    let out = tmpdir("schema");
    let cfg = out.join("bad.toml");
    std::fs::write(
        &cfg,
        r#"
species = "Sr87"
scenario = "leakage_sweep"
[grid]
parameter = "detuning_mhz"
min = 1000.0
max = 2000.0
points = 0
scale = "log"
"#,
    )
    .unwrap();
    let output = run(qnd().args(["leakage-sweep", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("grid"), "{stderr}");

    let output = run(qnd().args(["species", "Xe999", "--out"]).arg(&out));
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn worker_count_does_not_change_output() {
    let out1 = tmpdir("workers1");
    let out8 = tmpdir("workers8");
    let args = |out: &Path, workers: &str| {
        vec![
            "two-level".to_string(),
            "--grid-min".into(),
            "0".into(),
            "--grid-max".into(),
            "2".into(),
            "--grid-points".into(),
            "9".into(),
            "--workers".into(),
            workers.into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    assert!(run(qnd().args(args(&out1, "1"))).status.success());
    assert!(run(qnd().args(args(&out8, "8"))).status.success());
    assert_eq!(
        read(&out1.join("two-level.csv")),
        read(&out8.join("two-level.csv"))
    );
}

#[test]
fn meta_file_reproduces_the_run() {
    let first = tmpdir("meta_first");
    let again = tmpdir("meta_again");
    let output = run(qnd()
        .args([
            "two-level",
            "--gamma-mhz",
            "20",
            "--grid-min",
            "0.5",
            "--grid-max",
            "1.5",
            "--grid-points",
            "3",
            "--set",
            "sr87.1P1.Q_MHz=39",
            "--out",
        ])
        .arg(&first));
    assert!(output.status.success());
    let output = run(qnd()
        .args(["two-level", "--config"])
        .arg(first.join("two-level.meta.json"))
        .arg("--out")
        .arg(&again));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert_eq!(
        read(&first.join("two-level.csv")),
        read(&again.join("two-level.csv"))
    );
}

#[test]
fn override_flag_reaches_the_physics() {
    // A = Q = 0 makes every dressed shift vanish
    let out = tmpdir("override");
    let output = run(qnd()
        .args([
            "dressing-spectrum",
            "--set",
            "sr87.1P1.A_MHz=0",
            "--set",
            "sr87.1P1.Q_MHz=0",
            "--out",
        ])
        .arg(&out));
    assert!(output.status.success());
    let csv = read(&out.join("dressing-spectrum.csv"));
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cols[2].abs() < 1e-9, "shift {line}");
        assert!((cols[5] - 1.0).abs() < 1e-12, "overlap {line}");
    }
}

#[test]
fn env_cap_on_workers_is_accepted() {
    let out = tmpdir("envcap");
    let output = run(qnd()
        .env("QND_MAX_WORKERS", "2")
        .args([
            "two-level",
            "--workers",
            "64",
            "--delta-over-gamma",
            "1",
            "--out",
        ])
        .arg(&out));
    assert!(output.status.success());
    assert!(out.join("two-level.csv").exists());
}
