use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = "\
dimension = 1
s = 0.7
beta = 0.8
lambda = 1
c2 = 1
n = 512
L = 128
tau = 1
tol = 1e-8
T = 0.5
dt = 0.01
record_stride = 5
seed = 11
";

const COULOMB_CRITICAL: &str = "\
dimension = 3
s = 0.5
beta = 2
lambda = 1
c2 = 1
cmu = 0
n = 16
L = 8
";

fn fnls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fnls")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON summary")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_the_critical_coulomb_case() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "coulomb.cfg", COULOMB_CRITICAL);
    let out = fnls(&["validate", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["data"]["admissibility"]["existence_ok"], true);
    assert_eq!(v["data"]["admissibility"]["negative_energy_ok"], false);
}

#[test]
fn ground_state_then_evolve_fills_the_orbit_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let gs = dir.path().join("gs.snap");
    let hist = dir.path().join("history.csv");
    let out = fnls(&["ground-state", "--config", s(&cfg), "--out", s(&gs), "--history", s(&hist)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["passed"], true);
    let history = fs::read_to_string(&hist).unwrap();
    assert!(history.starts_with("iter,energy,kinetic,interaction,residual,kappa\n"));

    let traj = dir.path().join("traj.csv");
    let prefix = dir.path().join("dump_");
    let out = fnls(&[
        "evolve", "--config", s(&cfg), "--init", s(&gs), "--ref", s(&gs), "--T", "0.2", "--dt", "0.01", "--out", s(&traj),
        "--dump-every", "2", "--dump-prefix", s(&prefix),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&traj).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,mass,energy_J,linf,orbit_distance,overlap_phase"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        let d: f64 = r[4].parse().expect("orbit distance present");
        assert!(d < 1e-3, "{d}");
    }
    assert!(dir.path().join("dump_000000.snap").exists());
    assert!(dir.path().join("dump_000004.snap").exists());
    assert!(!dir.path().join("dump_000001.snap").exists());
}

#[test]
fn evolve_without_reference_leaves_the_orbit_column_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let gs = dir.path().join("gs.snap");
    assert_eq!(fnls(&["ground-state", "--config", s(&cfg), "--out", s(&gs)]).status.code(), Some(0));
    let traj = dir.path().join("traj.csv");
    let out = fnls(&["evolve", "--config", s(&cfg), "--init", s(&gs), "--out", s(&traj)]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&traj).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",,")));
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let run = |tag: &str| {
        let gs = dir.path().join(format!("gs_{tag}.snap"));
        let hist = dir.path().join(format!("hist_{tag}.csv"));
        let stab = dir.path().join(format!("stab_{tag}.csv"));
        let a = fnls(&["ground-state", "--config", s(&cfg), "--random-init", "--out", s(&gs), "--history", s(&hist)]);
        assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
        let b = fnls(&[
            "stability", "--config", s(&cfg), "--gs", s(&gs), "--deltas", "0,1e-3,1e-2", "--kinds", "random-smooth", "--T", "0.2",
            "--out", s(&stab),
        ]);
        assert!(b.status.code() == Some(0) || b.status.code() == Some(2), "{}", String::from_utf8_lossy(&b.stderr));
        (fs::read(&gs).unwrap(), fs::read(&hist).unwrap(), fs::read(&stab).unwrap(), a.stdout, b.stdout)
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn operational_errors_exit_one_with_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "dimension = 1\nsigma = 2\n");
    let out = fnls(&["validate", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("FNLS-ERR:"), "{err}");
    assert!(err.contains("unknown key 'sigma'"), "{err}");

    let out = fnls(&["validate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("FNLS-ERR:"));

    let out = fnls(&["ground-state", "--config", s(&write_config(dir.path(), "c.cfg", COULOMB_CRITICAL))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inadmissible"));
}

#[test]
fn failed_claims_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", &format!("{SMALL}max_iters = 3\n"));
    let out = fnls(&["ground-state", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["passed"], false);
    assert!(v["assertions"].as_array().unwrap().iter().any(|a| a["name"] == "converged" && a["passed"] == false));
}

#[test]
fn overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let out = fnls(&["validate", "--config", s(&cfg), "--set", "lambda=0.5", "--set", "kernel=cell-average"]);
    assert_eq!(out.status.code(), Some(0));
    let text = json(&out)["data"]["config"].as_str().unwrap().to_string();
    assert!(text.contains("lambda = 0.5\n") && text.contains("kernel = cell-average\n"), "{text}");
}

#[test]
fn analysis_commands_run_on_a_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let gs = dir.path().join("gs.snap");
    assert_eq!(fnls(&["ground-state", "--config", s(&cfg), "--out", s(&gs)]).status.code(), Some(0));

    let out = fnls(&["analyze", "orbit", "--config", s(&cfg), "--state", s(&gs), "--ref", s(&gs)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["data"]["distance"].as_f64().unwrap() < 1e-10);

    let levy = dir.path().join("levy.csv");
    let out = fnls(&["analyze", "levy", "--config", s(&cfg), "--state", s(&gs), "--expect", "compact-like", "--out", s(&levy)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(fs::read_to_string(&levy).unwrap().starts_with("r,q\n"));

    let exps = dir.path().join("exponents.csv");
    let out = fnls(&["analyze", "exponents", "--config", s(&cfg), "--out", s(&exps)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn subadd_checks_the_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let curve = dir.path().join("curve.csv");
    let out = fnls(&["analyze", "subadd", "--config", s(&cfg), "--out", s(&curve)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = fs::read_to_string(&curve).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 + 4);
}

#[test]
fn sweep_runs_every_config() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    fs::create_dir(&configs).unwrap();
    write_config(&configs, "a.cfg", SMALL);
    write_config(&configs, "b.cfg", &SMALL.replace("lambda = 1", "lambda = 2"));
    let out_dir = dir.path().join("out");
    let out = fnls(&["sweep", "--configs", s(&configs), "--jobs", "2", "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["a.snap", "b.snap", "a.history.csv", "b.json", "sweep.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let index = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = index.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("a.cfg,true,") && lines[2].starts_with("b.cfg,true,"));
}
