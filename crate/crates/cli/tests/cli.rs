//! End-to-end runs of the `et6` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn et6(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_et6"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .env_remove("ET6_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn check_passes_at_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[gas]\nD = 5\n\n[check]\nZ = [0.0]\n");
    let out = et6(dir.path(), &["check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("check.csv")).unwrap();
    assert!(text.starts_with("Z,quantity,closed_form,quadrature,rel_err,rule,pass"));
    assert!(!text.contains(",false"));
}

#[test]
fn eigen_lists_the_sound_speeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = et6(dir.path(), &["eigen", "--D", "5", "--rho", "1", "--p", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("-1.2909944") && text.contains("+1.2909944"), "{text}");
    assert!(dir.path().join("eigen.csv").exists());
}

#[test]
fn strict_coupling_condition_fails_on_contact_waves() {
    let dir = tempfile::tempdir().unwrap();
    let out = et6(dir.path(), &["eigen", "--D", "7", "--strict-k"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("contact:density") && err.contains("eigen.csv"), "{err}");
}

#[test]
fn relax_follows_the_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let out = et6(dir.path(), &["relax", "--Pi0-over-p", "0.3", "--tau", "0.1", "--t-end", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = read_csv(&dir.path().join("relax.csv"));
    assert_eq!(rows.len(), 21);
    for r in rows {
        let (t, pi, p) = (r[0], r[1], r[3]);
        assert!((pi - 0.3 * p * (-t / 0.1).exp()).abs() <= 1e-12 * p, "t = {t}");
    }
}

#[test]
fn run_writes_snapshots_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[gas]\nD = 5\ntau = 0.05\n\n[scenario]\nkind = \"acoustic\"\nN = 64\nt_end = 0.1\n\n[output]\ncadence = 0.05\n",
    );
    let out = et6(dir.path(), &["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let snap = fs::read_to_string(dir.path().join("snapshot_0002.csv")).unwrap();
    assert!(snap.starts_with("x,rho,vx,T,p,Pi,Pi_over_p,h,k\n"));
    assert_eq!(snap.lines().count(), 65);
    let diag = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,total_F,total_Fx,total_Gll,total_entropy,max_abs_Z,projections\n"));
}

#[test]
fn identical_runs_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let text = "[scenario]\nkind = \"riemann\"\nN = 50\nt_end = 0.05\nscheme = \"rusanov\"\n";
    let cfg = write_config(a.path(), text);
    for d in [a.path(), b.path()] {
        assert_eq!(et6(d, &["run", "--config", &cfg]).status.code(), Some(0));
    }
    for name in ["snapshot_0001.csv", "diagnostics.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn nslimit_and_quick_sweep_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = et6(dir.path(), &["nslimit"]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    let out = et6(dir.path(), &["--quick", "sweep"]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    assert!(dir.path().join("sweep.csv").exists());
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("[gas]\nD = 3\n", "gas.D"),
        ("[scenario]\nCFL = 1.5\n", "scenario.CFL"),
        ("[gas]\nD = 5\nspin = 2\n", "spin"),
        ("[scenario]\nN = \"many\"\n", "scenario.N"),
    ] {
        let cfg = write_config(dir.path(), text);
        let out = et6(dir.path(), &["relax", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(key), "{text}: {}", stderr(&out));
    }
    let out = et6(dir.path(), &["relax", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let out = et6(dir.path(), &["eigen", "--Pi-over-p", "0.9"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let out = et6(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scenario]\nN = 8\nt_end = 5.0\n");
    let out = et6(dir.path(), &["run", "--config", &cfg, "--N", "16", "--t-end", "0.01"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let snap = fs::read_to_string(dir.path().join("snapshot_0001.csv")).unwrap();
    assert_eq!(snap.lines().count(), 17);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_et6"))
        .args(["eigen", "--D", "5"])
        .env("ET6_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("eigen.csv").exists());
}
