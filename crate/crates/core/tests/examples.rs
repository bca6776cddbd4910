//! Runs each example binary built alongside the tests and checks its output.

use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> PathBuf {
    // target/<profile>/deps/<test binary> -> target/<profile>/examples/<name>
    let exe = std::env::current_exe().unwrap();
    let dir = exe.parent().and_then(|d| d.parent()).unwrap().join("examples");
    dir.join(format!("{name}{}", std::env::consts::EXE_SUFFIX))
}

fn run(name: &str, args: &[&str]) -> String {
    let path = example(name);
    assert!(path.is_file(), "{} not built; run through `cargo test`", path.display());
    let out = Command::new(&path).args(args).output().unwrap();
    assert!(out.status.success(), "{name} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn canonicalize() {
    let out = run("canonicalize", &["OC(=O)c1ccccc1OC(C)=O"]);
    assert!(out.contains("canonical  CC(=O)Oc1ccccc1C(=O)O"));
    assert_eq!(out.matches("-> CC(=O)Oc1ccccc1C(=O)O").count(), 3);
}

#[test]
fn substructure() {
    assert!(run("substructure", &[]).contains("O=C(O)c1ccccc1C(=O)O         2 match(es)"));
}

#[test]
fn screen() {
    let out = run("screen", &[]);
    assert_eq!(out.matches("(hard fail)").count(), 3);
    assert!(out.contains("hard=[\"mcf003\"]"));
}

#[test]
fn brics() {
    let out = run("brics", &[]);
    assert!(out.contains("-> 4 fragments"));
    assert!(out.contains("reassembled CC(=O)Nc1ccc(cc1)OCC(=O)N1CCOCC1"));
}

#[test]
fn generators() {
    let out = run("generators", &[]);
    for kind in ["ngram", "ga", "fragment"] {
        assert_eq!(out.lines().filter(|l| l.starts_with(kind)).count(), 2, "{out}");
    }
}

#[test]
fn experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("experiment", &[dir.path().to_str().unwrap()]);
    assert!(out.contains("4 epochs, stop reason Completed"));
    assert!(out.contains("#1 "));
    assert!(dir.path().join("ranked.csv").is_file());
}

#[test]
fn custom_generator() {
    let out = run("custom_generator", &[]);
    assert!(out.contains("lib (library)") && out.contains("ga_a (ga)"));
}

#[test]
fn benchmark() {
    let out = run("benchmark", &[]);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("held-out,200,200,200,800,200,1.0,1.0,1.0,"));
}

#[test]
fn cluster_morph() {
    let out = run("cluster_morph", &["0.4"]);
    assert!(out.contains("1000 molecules, 884 chemotypes"));
    assert!(out.contains("Metabolic: 2 variants"));
}

#[test]
fn som() {
    let out = run("som", &[]);
    let acc: f64 = out.lines().find_map(|l| l.strip_prefix("held-out accuracy ")).unwrap().parse().unwrap();
    assert!(acc > 0.8, "{out}");
}
