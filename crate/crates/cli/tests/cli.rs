use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, command: &str, config: &str, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.cfg"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_kjplate"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SIM: &str = "T=0.05 dt=0.01 half_length=4 depth=2 h=0.25";

#[test]
fn config_errors_exit_two_and_list_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "simulate", "U=1.2 dt=-1 bogus=3", "bad");
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("U must lie in [0,1)"), "{err}");
    assert!(err.contains("unknown key 'bogus'"), "{err}");
    assert!(err.contains("dt"), "{err}");
    assert!(!dir.path().join("bad").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "nonsense", "", "a").status.code(), Some(2));
    assert_eq!(run(dir.path(), "plate", "command=simulate", "b").status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_kjplate")).arg("hilbert").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_kjplate"))
        .args(["hilbert", "--config", "/nonexistent/cfg"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn conservative_simulation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "simulate", SIM, "sim");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("energy conservation: PASS"));
    let out = dir.path().join("sim");
    for f in ["energy.csv", "final_snapshot.bin", "final_surface.csv", "plate.dat", "manifest.txt", "summary.txt"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("status=complete"));
    assert!(manifest.contains("U=0\n"));
    let energy = fs::read_to_string(out.join("energy.csv")).unwrap();
    assert!(energy.starts_with("t,E_pl,E_fl,E_total,potential,boundary_work,residual"));
    assert_eq!(energy.lines().count(), 1 + 6);
}

#[test]
fn wrong_exponent_fails_symbol_check() {
    let dir = tempfile::tempdir().unwrap();
    let small = "alpha_n=8 eta_n=8 zu_n=8";
    let o = run(dir.path(), "symbols", &format!("{small} exponent=1.0"), "wrong");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("case bounds: FAIL"));
    let summary = fs::read_to_string(dir.path().join("wrong/summary.txt")).unwrap();
    assert!(summary.ends_with("overall: FAIL\n"));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SIM} U=0.5 nonlinearity=berger seed=7");
    run(dir.path(), "simulate", &cfg, "one");
    run(dir.path(), "simulate", &cfg, "two");
    for f in ["energy.csv", "final_surface.csv", "final_snapshot.bin", "plate.dat"] {
        let a = fs::read(dir.path().join("one").join(f)).unwrap();
        let b = fs::read(dir.path().join("two").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
    run(dir.path(), "plate", "cells=16 samples=3", "p1");
    run(dir.path(), "plate", "cells=16 samples=3", "p2");
    for f in ["gradient.csv", "scan.dat"] {
        assert_eq!(
            fs::read(dir.path().join("p1").join(f)).unwrap(),
            fs::read(dir.path().join("p2").join(f)).unwrap()
        );
    }
}

#[test]
fn hilbert_and_possio_pass_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "hilbert", "", "h");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(dir.path(), "possio", "n=16 points=2048 path=direct", "p");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().join("p/possio.csv").exists());
}

#[test]
fn subset_of_criteria_via_verify_all() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "verify-all", "criteria=1,2", "v");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("v/verify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
