use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn hellinger(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hellinger"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Value of `key=` on the line starting with `measure=<name>`.
fn field(text: &str, name: &str, key: &str) -> f64 {
    let prefix = format!("measure={name} ");
    let line = text.lines().find(|l| l.starts_with(&prefix)).expect("measure line");
    let tag = format!("{key}=");
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(tag.as_str()))
        .expect("key present")
        .parse()
        .expect("numeric value")
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.path().join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path_str(&out)]);
    let o = hellinger(&full);
    assert!(o.status.success(), "gen failed: {}", String::from_utf8_lossy(&o.stderr));
    out
}

fn measure(state: &Path, measures: &str) -> String {
    let o = hellinger(&["measure", "--state", path_str(state), "--measures", measures]);
    assert!(o.status.success(), "measure failed: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

#[test]
fn mcms_measures() {
    let dir = TempDir::new().unwrap();
    let s = gen(&dir, "m.json", &["--kind", "mcms", "--p", "0.5"]);
    let text = measure(&s, "ch,cg");
    let p: f64 = 0.5;
    let expected_cg = 1.0 - 0.75 * (1.0 - p).sqrt() - 0.25 * (1.0 + 3.0 * p).sqrt();
    assert!((field(&text, "ch", "value") - 2.0 * expected_cg).abs() < 1e-5);
    assert!((field(&text, "cg", "value") - expected_cg).abs() < 1e-5);
}

#[test]
fn incoherent_state_measures_zero() {
    let dir = TempDir::new().unwrap();
    let s = gen(&dir, "b.json", &["--kind", "basis_pure", "--d", "3", "--k", "1"]);
    let text = measure(&s, "ch,cg,cl1,cl2");
    for m in ["ch", "cg", "cl1", "cl2"] {
        assert!(field(&text, m, "value").abs() < 1e-12, "{m}: {text}");
    }
}

#[test]
fn bell_correlations() {
    let dir = TempDir::new().unwrap();
    let s = gen(&dir, "bell.json", &["--kind", "bell"]);
    let text = measure(&s, "d,d_sqrt,ds");
    assert!((field(&text, "d", "value") - 1.0).abs() < 1e-5);
    let target = 2.0 - 2f64.sqrt();
    assert!((field(&text, "d_sqrt", "value") - target).abs() < 1e-5);
    assert!((field(&text, "ds", "value") - target).abs() < 1e-5);
}

#[test]
fn classical_quantum_has_no_correlation() {
    let dir = TempDir::new().unwrap();
    let s = gen(&dir, "cq.json", &["--kind", "cq", "--weights", "0.3,0.7", "--seed", "4"]);
    let text = measure(&s, "d");
    assert!(field(&text, "d", "value") < 1e-8, "{text}");
}

#[test]
fn sweep_writes_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = hellinger(&["sweep-mcms", "--steps", "11", "--pmin", "0.1", "--out", path_str(&out)]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "p,ch_half,cg_analytic,cg_numeric,max_fidelity,ch");
    assert_eq!(lines.len(), 12);
    let last: Vec<f64> = lines[11].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    assert!((last[5] - 1.0).abs() < 1e-12);
    assert!((last[2] - 0.5).abs() < 1e-12);
    for row in &lines[1..] {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[2] - v[3]).abs() < 1e-4, "{row}");
    }
}

#[test]
fn sweep_rejects_bad_range() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    for args in [["--pmin", "0"], ["--pmax", "1.5"]] {
        let mut full = vec!["sweep-mcms", "--out", path_str(&out)];
        full.extend_from_slice(&args);
        assert_eq!(hellinger(&full).status.code(), Some(2));
    }
}

#[test]
fn verify_prop1_clean_run() {
    let o = hellinger(&["verify", "--suite", "prop1", "--trials", "300", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("suite=prop1 trials=300"), "{text}");
    assert!(text.contains("violations=0"), "{text}");
}

#[test]
fn verify_zero_trials() {
    let o = hellinger(&["verify", "--suite", "fidelity", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("trials=0"));
}

#[test]
fn verify_unknown_suite() {
    assert_eq!(hellinger(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = hellinger(&[
            "verify", "--suite", "tradeoff", "--trials", "20", "--seed", "9", "--out", path_str(out),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_random_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["--kind", "random", "--d", "4", "--rank", "2", "--seed", "17", "--dims", "2x2"];
    let a = gen(&dir, "a.json", &args);
    let b = gen(&dir, "b.json", &args);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn convert_attains_tradeoff() {
    let dir = TempDir::new().unwrap();
    let s = gen(&dir, "plus.json", &["--kind", "plus_state"]);
    let out = dir.path().join("ab.json");
    let o = hellinger(&["convert", "--state", path_str(&s), "--db", "2", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("c_h=5.85786e-1"), "{text}");
    assert!(text.contains("d_s=5.85786e-1"), "{text}");
    assert!(text.contains("attainability_margin=0.00000e0"), "{text}");
    assert!(out.exists());
}

#[test]
fn convert_incoherent_input() {
    let dir = TempDir::new().unwrap();
    let s = gen(&dir, "z.json", &["--kind", "basis_pure", "--d", "2"]);
    let out = dir.path().join("ab.json");
    let o = hellinger(&["convert", "--state", path_str(&s), "--db", "3", "--out", path_str(&out)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("c_h=0.00000e0"));
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dims\": [2]").unwrap();
    assert_eq!(hellinger(&["measure", "--state", path_str(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(hellinger(&["measure", "--state", path_str(&missing)]).status.code(), Some(2));
    assert_eq!(hellinger(&["measure", "--bogus"]).status.code(), Some(2));
}
