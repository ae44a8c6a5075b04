use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn foamswell(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foamswell"))
        .args(args)
        .env("FOAMSWELL_OUT", out)
        .output()
        .expect("binary runs")
}

fn run(name: &str, out: &Path) -> Output {
    foamswell(&["run", fixture(name).to_str().unwrap()], out)
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn run_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("small.toml", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ts = read(dir.path().join("timeseries.csv"));
    assert_eq!(
        ts.lines().next().unwrap(),
        "t,s,s_dot,mass,energy,min_strain,strain_bound,picard_iters,newton_iters_beam,newton_iters_pore"
    );
    assert_eq!(ts.lines().count(), 22);
    for k in 0..5 {
        let snap = read(dir.path().join(format!("snapshots/{k:04}.csv")));
        assert_eq!(snap.lines().next().unwrap(), "x,u,v,p_bar,p_hat");
        assert_eq!(snap.lines().count(), 18);
    }
    let report: serde_json::Value = serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    assert_eq!(report["status"], "ok");
    assert_eq!(report["metadata"]["config_hash"].as_str().unwrap().len(), 64);
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn runs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run("small.toml", a.path()).status.code(), Some(0));
    assert_eq!(run("small.toml", b.path()).status.code(), Some(0));
    for file in ["timeseries.csv", "snapshots/0000.csv", "snapshots/0004.csv"] {
        assert_eq!(read(a.path().join(file)), read(b.path().join(file)), "{file}");
    }
}

#[test]
fn config_errors_exit_2_before_stepping() {
    for name in ["bad_syntax.toml", "touching_strain.toml", "broken_compat.toml", "missing.toml"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run(name, dir.path());
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(!dir.path().join("timeseries.csv").exists(), "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let syntax = run("bad_syntax.toml", dir.path());
    assert!(String::from_utf8_lossy(&syntax.stderr).contains("line 4"));
    let compat = run("broken_compat.toml", dir.path());
    assert!(String::from_utf8_lossy(&compat.stderr).contains("initial.v0_slope"));
}

#[test]
fn check_config_reports_hash_or_field() {
    let dir = tempfile::tempdir().unwrap();
    let ok = foamswell(&["check-config", fixture("small.toml").to_str().unwrap()], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("ok "));
    let bad = foamswell(&["check-config", fixture("touching_strain.toml").to_str().unwrap()], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("initial.alpha"));
}

#[test]
fn huge_step_is_a_coupling_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("huge_dt.toml", dir.path());
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    assert_eq!(report["status"], "solver");
    assert!(report["error"].as_str().unwrap().contains("coupling"));
    assert_eq!(report["failed_step"], 1);
}

#[test]
fn coarse_step_fails_mass_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("coarse_dt.toml", dir.path());
    assert_eq!(out.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["mass_series"]);
}

#[test]
fn verify_lemmas_writes_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = foamswell(&["verify", "lemmas"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let orders = read(dir.path().join("orders.csv"));
    assert_eq!(
        orders.lines().next().unwrap(),
        "suite,study,resolution,error,observed,band_low,band_high,passed"
    );
    assert!(orders.lines().skip(1).all(|l| l.ends_with(",true")));
    let bad = foamswell(&["verify", "nope"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}
