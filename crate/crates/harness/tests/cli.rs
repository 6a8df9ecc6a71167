//! End-to-end runs of the `malign` binary.

use std::path::Path;
use std::process::Command;

use malign_harness::records::read_trials;

fn malign(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_malign"))
        .current_dir(dir)
        .env_remove("MALIGN_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const ONE_POINT: &str = r#"{"model": "gaussian", "n": 5, "p": 2, "grid": {"rho": [0.7]},
    "trials": 1, "estimator": {"kind": "exhaustive_map"}, "seed": 3}"#;

#[test]
fn one_point_one_trial_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", ONE_POINT);
    let out = malign(dir.path(), &["phase", "--config", &config, "--out", "res/run.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("res/run.csv")).unwrap();
    assert_eq!(text.lines().count(), 3, "{text}");
    assert_eq!(read_trials(text.as_bytes()).unwrap().len(), 1);
    assert!(dir.path().join("res/run.summary.json").exists());
    let meta = std::fs::read_to_string(dir.path().join("res/run.meta.json")).unwrap();
    assert!(meta.contains("wall_seconds"));
    assert!(!text.contains("wall"));
}

#[test]
fn reruns_and_thread_counts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "c.json",
        r#"{"model": "gaussian", "n": 8, "p": 3, "grid": {"rho": [0.3, 0.9]},
            "trials": 6, "estimator": {"kind": "anneal", "schedule": {"t0": 10.0, "moves": 20000}}, "seed": 11}"#,
    );
    let a = malign(dir.path(), &["phase", "--config", &config, "--out", "a.csv", "--threads", "1"]);
    let b = Command::new(env!("CARGO_BIN_EXE_malign"))
        .current_dir(dir.path())
        .env("MALIGN_THREADS", "3")
        .args(["phase", "--config", &config, "--out", "b.csv", "--threads", "1"])
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    let meta = String::from_utf8(read("b.meta.json")).unwrap();
    assert!(meta.contains("\"threads\": 3"), "{meta}");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", ONE_POINT);
    malign(dir.path(), &["phase", "--config", &config, "--out", "a.csv"]);
    malign(dir.path(), &["phase", "--config", &config, "--out", "b.csv", "--seed", "4"]);
    let rows = |f: &str| read_trials(std::fs::File::open(dir.path().join(f)).unwrap()).unwrap();
    assert_ne!(rows("a.csv")[0].seed, rows("b.csv")[0].seed);
}

#[test]
fn sample_energy_map_posterior() {
    let dir = tempfile::tempdir().unwrap();
    let out = malign(
        dir.path(),
        &["sample", "--model", "er", "--n", "5", "--p", "2", "--lambda", "3", "--s", "0.8", "--seed", "2", "--out", "s.json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let energy = malign(dir.path(), &["energy", "--sample", "s.json"]);
    assert!(String::from_utf8_lossy(&energy.stdout).contains("hamiltonian_exact"));
    let map = malign(dir.path(), &["map", "--sample", "s.json"]);
    let text = String::from_utf8_lossy(&map.stdout);
    assert!(text.contains("\"exact_hit\""), "{text}");
    let post = malign(dir.path(), &["posterior", "--sample", "s.json"]);
    // Header plus 5! alignments.
    assert_eq!(String::from_utf8_lossy(&post.stdout).lines().count(), 121);
}

#[test]
fn verify_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let ok = malign(dir.path(), &["verify", "trace", "--instances", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    let empty = malign(dir.path(), &["verify", "bayes_oracle", "--instances", "0"]);
    assert_eq!(empty.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&empty.stdout).contains("0 instances"));
    // K2 breaks the degree-factorial bound.
    let bad = malign(dir.path(), &["verify", "automorphism", "--n", "2"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn bad_inputs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", r#"{"model": "gaussian", "n": 5, "p": 2, "grid": {"rho": []},
        "trials": 1, "estimator": {"kind": "exhaustive_map"}, "seed": 3}"#);
    let out = malign(dir.path(), &["phase", "--config", &config, "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid is empty"));
    let missing = malign(dir.path(), &["phase", "--config", "nope.json", "--out", "x.csv"]);
    assert_eq!(missing.status.code(), Some(2));
}
