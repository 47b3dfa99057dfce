use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn socsqueeze(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_socsqueeze"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn unknown_axis_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(
        dir.path(),
        "bad.ini",
        "[run]\ncommand = phase-diagram\n[phase_diagram]\naxis1 = gamma:0:1:3\naxis2 = delta:0:1:3\n",
    );
    let o = socsqueeze(&["run", "--out", out.to_str().unwrap()], Some(&cfg));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));
    assert!(!out.exists());
}

#[test]
fn ed_over_cap_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(dir.path(), "big.ini", "[run]\ncommand = eff-squeeze\n[params]\nN = 5000\n");
    let o = socsqueeze(&["run", "--out", out.to_str().unwrap()], Some(&cfg));
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn failing_sweep_point_exits_3_and_keeps_other_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(
        dir.path(),
        "sweep.ini",
        "[run]\ncommand = eff-squeeze\nbackend = gaussian\n[params]\nN = 1000\nomega_R = 2\n[sweep]\nepsilon = 6, -10\n",
    );
    let o = socsqueeze(&["run", "--out", out.to_str().unwrap()], Some(&cfg));
    assert_eq!(o.status.code(), Some(3));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",ok"));
    assert!(rows[2].contains("error"));
    assert!(out.join("report_0000.json").exists());
    assert!(!out.join("report_0001.json").exists());
}

#[test]
fn plot_data_round_trip_and_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(
        dir.path(),
        "pd.ini",
        "[run]\ncommand = phase-diagram\n[params]\ndelta = 1\n[phase_diagram]\naxis1 = omega_R:0:4:5\naxis2 = epsilon:-2:10:7\n",
    );
    assert!(socsqueeze(&["run", "--out", out.to_str().unwrap()], Some(&cfg)).status.success());
    let o = socsqueeze(&["plot-data", "--input", out.to_str().unwrap()], None);
    assert!(o.status.success());
    let grid = fs::read_to_string(out.join("n_minima_grid.dat")).unwrap();
    let rows: Vec<&str> = grid.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.split(' ').count() == 7));

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let o = socsqueeze(&["plot-data", "--input", empty.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn environment_supplies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env_out");
    let cfg = write(dir.path(), "d.ini", "[run]\ncommand = dispersion\n[params]\nomega_R = 1\n");
    let o = Command::new(env!("CARGO_BIN_EXE_socsqueeze"))
        .args(["run"])
        .env("SOCSQUEEZE_CONFIG", &cfg)
        .env("SOCSQUEEZE_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("dispersion.csv").exists());
    assert!(out.join("manifest.json").exists());
}
