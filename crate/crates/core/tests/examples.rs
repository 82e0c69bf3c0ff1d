//! Runs every example binary and checks a line of its output.

use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> String {
    // cargo builds examples next to the test binaries' `deps` directory
    let dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().join("examples");
    let bin: PathBuf = dir.join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
    let out = if bin.exists() {
        Command::new(&bin).output().unwrap()
    } else {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        Command::new(cargo)
            .args(["run", "-q", "--example", name])
            .current_dir(env!("CARGO_MANIFEST_DIR"))
            .output()
            .unwrap()
    };
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn spin_half() {
    assert!(example("spin_half").contains("Pr(x+ at t3 | X+ at t4) = 1"));
}

#[test]
fn wavepacket() {
    let out = example("wavepacket");
    assert!(out.contains("| A silent at t2) = 1"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn epr() {
    let out = example("epr");
    assert!(out.contains("Pr(S_bz = -S_az) = 1"));
    assert_eq!(out.matches("F4  0.250").count(), 4);
}

#[test]
fn hardy() {
    let out = example("hardy");
    assert!(out.contains("Pr(e and ebar) = 0.083333333333"));
    assert!(out.contains("consistent = false"));
}

#[test]
fn compatibility() {
    let out = example("compatibility");
    assert!(out.contains("kinematic-incompatible"));
    assert!(out.contains("dynamic-incompatible"));
    assert!(out.contains("refinement"));
}

#[test]
fn foliation_embedding() {
    let out = example("foliation_embedding");
    assert!(out.contains("Spacelike, after a 0.6 boost Spacelike"));
    assert!(out.contains("cannot share a foliation"));
}

#[test]
fn famspec_roundtrip() {
    assert!(example("famspec_roundtrip").contains("Pr(x+ at t1 and t2) = 0.5"));
}

#[test]
fn covariance() {
    let out = example("covariance");
    assert_eq!(out.matches("passed = true").count(), 3);
    assert!(out.contains("Norm(0.0)"));
}

#[test]
fn custom_dynamics() {
    let out = example("custom_dynamics");
    assert!(out.contains("0.131303  up ⊙ I ⊙ I ⊙ up"));
}

#[test]
fn cli_report() {
    let out = example("cli_report");
    assert!(out.starts_with("exit code 0"));
    assert!(out.contains("\"schema\": 1"));
}
