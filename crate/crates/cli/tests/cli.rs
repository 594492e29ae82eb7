use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latslice"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn latslice")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_validate_dim_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(d, &["generate", "parabolic-staircase", "--columns", "32", "--out", "p.txt"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(d, &["validate", "--in", "p.txt", "--out", "v.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&d.join("v.json"))["results"]["valid"], true);

    let o = run(d, &["dim", "--in", "p.txt", "--scales", "dyadic:1024", "--out", "d.csv", "--report", "d.json"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(d.join("d.csv")).unwrap();
    assert!(csv.starts_with("scale,count,ratio\n2,1,"), "{csv}");
    assert_eq!(csv.lines().count(), 11);
    let report = json(&d.join("d.json"));
    assert_eq!(report["command"], "dim");
    assert!(report["provenance"]["version"].is_string());
}

#[test]
fn implicit_and_materialized_give_same_profile() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (mode, out) in [("materialize", "m.txt"), ("implicit", "i.json")] {
        let o = run(d, &["generate", "parabolic-staircase", "--columns", "100", "--mode", mode, "--out", out]);
        assert_eq!(code(&o), 0);
    }
    for (input, out) in [("m.txt", "m.csv"), ("i.json", "i.csv")] {
        assert_eq!(code(&run(d, &["dim", "--in", input, "--scales", "dyadic:16384", "--out", out])), 0);
    }
    assert_eq!(std::fs::read(d.join("m.csv")).unwrap(), std::fs::read(d.join("i.csv")).unwrap());
}

#[test]
fn reports_are_deterministic_apart_from_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["generate", "parabolic-staircase", "--columns", "40", "--out", "p.txt"]);
    let mut results = Vec::new();
    for (i, seq) in [(0, false), (1, true)] {
        let out = format!("s{i}.json");
        let mut args = vec!["survey", "--in", "p.txt", "--N", "40", "--M", "6", "--mc", "500", "--seed", "9", "--out", &out];
        if seq {
            args.push("--sequential");
        }
        assert_eq!(code(&run(d, &args)), 0);
        let mut v = json(&d.join(&out));
        assert_eq!(v["provenance"]["seed"], 9);
        v.as_object_mut().unwrap().remove("provenance");
        results.push(v);
    }
    assert_eq!(results[0], results[1]);
}

#[test]
fn slice_accepts_negative_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["generate", "unit-line", "--slope", "2", "--count", "50", "--out", "l.txt"]);
    let o = run(d, &["slice", "--in", "l.txt", "--slope", "2,-0.5", "--out", "s.txt"]);
    assert_eq!(code(&o), 0);
    let summary: serde_json::Value = serde_json::from_slice(o.stdout.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(summary["count"], 50);
}

#[test]
fn ff_checks_and_bad_prime() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(d, &["ff", "--p", "11", "--set", "random:0.3:1", "--out", "ff.json"]);
    assert_eq!(code(&o), 0);
    let v = json(&d.join("ff.json"));
    assert_eq!(v["results"]["identity"]["holds"], true);
    assert_eq!(v["results"]["identity"]["total"].as_u64().unwrap(), v["results"]["size"].as_u64().unwrap() * 11);

    let o = run(d, &["ff", "--p", "12", "--set", "full", "--out", "bad.json"]);
    assert_eq!(code(&o), 2);
    assert!(!d.join("bad.json").exists());
}

#[test]
fn exit_codes_and_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["dim", "--bogus-flag", "--out", "x.csv"])), 2);
    assert_eq!(code(&run(d, &["generate", "zigzag", "--delta", "0.3", "--out", "z.txt"])), 2);
    assert_eq!(code(&run(d, &["dim", "--in", "missing.txt", "--out", "x.csv"])), 4);
    assert_eq!(code(&run(d, &["repro", "no-such-check"])), 2);
    std::fs::write(d.join("close.txt"), "0 0\n0.5 0\n").unwrap();
    assert_eq!(code(&run(d, &["validate", "--in", "close.txt"])), 3);
    std::fs::write(d.join("garbage.txt"), "1 2\nthree four\n").unwrap();
    assert_eq!(code(&run(d, &["dim", "--in", "garbage.txt", "--out", "g.csv"])), 2);
    let left: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left.len(), 2, "{left:?}");
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_latslice"))
        .args(["repro", "ff", "--p", "5"])
        .env("LATSLICE_THREADS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);

    let o = Command::new(env!("CARGO_BIN_EXE_latslice"))
        .args(["repro", "ff", "--p", "5"])
        .env("LATSLICE_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
