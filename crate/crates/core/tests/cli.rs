use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use semiq::cli::{KEYS, LIMIT_HEADER, SIMULATE_HEADER};

fn semiq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiq")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = semiq(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn manifest(dir: &Path, csv: &str) -> HashMap<String, String> {
    read(dir, &format!("{csv}.manifest"))
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn simulate_header_and_number_format() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--model.hbar=1e-3", "--initial.kind=shell", "--integrator.t_end=5", "--output=s.csv"]);
    let csv = read(dir.path(), "s.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SIMULATE_HEADER));
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 14);
        for f in fields {
            let v: f64 = f.parse().unwrap();
            assert_eq!(&format!("{:.16e}", v + 0.0), f);
        }
    }
}

#[test]
fn manifest_records_frozen_constant_and_initial_invariants() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--integrator.representation=multipliers", "--integrator.t_end=1", "--output=m.csv"]);
    let m = manifest(dir.path(), "m.csv");
    for key in ["k_nl", "initial.I", "initial.I_lambda", "initial.E", "initial.S", "drift.I_lambda", "config.model.hbar"] {
        assert!(m.contains_key(key), "missing {key}");
    }
    assert!(m["k_nl"].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn free_oscillator_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--model.e=0", "--integrator.t_end=50", "--output=free.csv"]);
    let e = column(&read(dir.path(), "free.csv"), "E");
    let e0 = e[0];
    assert!(e.iter().all(|v| ((v - e0) / e0).abs() < 5e-11), "energy varies");
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["lyapunov", "--model.hbar=1e-3", "--initial.kind=shell", "--shell.e_r=3", "--lyapunov.horizon=400", "--seed=5"];
    ok(dir.path(), &[&args[..], &["--output=a.csv"]].concat());
    ok(dir.path(), &[&args[..], &["--output=b.csv"]].concat());
    assert_eq!(read(dir.path(), "a.csv"), read(dir.path(), "b.csv"));
}

#[test]
fn i_first_limit_reaches_a_pure_state() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["limit", "--limit.ordering=i_first", "--limit.t_end=0", "--output=l.csv"]);
    let csv = read(dir.path(), "l.csv");
    assert_eq!(csv.lines().next(), Some(LIMIT_HEADER));
    let m = manifest(dir.path(), "l.csv");
    assert!(m["verdict.final_purity"].parse::<f64>().unwrap() >= 0.999);
    assert!(m["verdict.final_entropy"].parse::<f64>().unwrap() <= 1e-3);
    assert_eq!(m["verdict.constraint_respected"], "true");
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# comment\nmodel.e = 0\nintegrator.t_end = 3\noutput = from_file.csv\n").unwrap();
    ok(dir.path(), &["simulate", "--config", "run.cfg", "--integrator.t_end=2"]);
    let t = column(&read(dir.path(), "from_file.csv"), "t");
    assert_eq!(*t.last().unwrap(), 2.0);
    assert_eq!(manifest(dir.path(), "from_file.csv")["config.model.e"], "0");
}

#[test]
fn exit_codes_follow_error_categories() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| semiq(dir.path(), args).status.code().unwrap();
    assert_eq!(code(&["simulate", "--no.such.key=1"]), 1);
    assert_eq!(code(&["teleport"]), 1);
    assert_eq!(code(&["simulate", "--config", "missing.cfg"]), 1);
    assert_eq!(code(&["simulate", "--model.hbar=0", "--integrator.representation=multipliers"]), 1);
    std::fs::write(dir.path().join("bad.cfg"), "model.hbar = 1\nthis line is broken\n").unwrap();
    let out = semiq(dir.path(), &["simulate", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // x2·p2 = 0.01 violates the uncertainty bound at hbar = 1.
    assert_eq!(code(&["simulate", "--initial.x2=0.1", "--initial.p2=0.1", "--output=x.csv"]), 2);
    // I = (E/E_r)^2 = 1 is out of reach of a shell holding at most 0.64.
    assert_eq!(code(&["simulate", "--initial.kind=shell", "--shell.e_r=1", "--output=x.csv"]), 3);
}

#[test]
fn keys_lists_every_documented_key() {
    let out = ok(Path::new("."), &["keys"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for (key, _, _) in KEYS {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(key)), "{key}");
    }
}
