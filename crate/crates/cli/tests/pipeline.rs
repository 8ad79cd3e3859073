use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qwoa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwoa"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn qwoa")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = qwoa(dir, args);
    assert!(
        out.status.success(),
        "qwoa {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

const CONFIG: &str = "# small desk run\nsizes = 10\nper_size = 20\nls_runs = 200\n";

fn pipeline(dir: &Path) {
    fs::write(dir.join("run.cfg"), CONFIG).unwrap();
    let c = ["--config", "run.cfg"];
    let with = |rest: &[&str]| -> Vec<String> { c.iter().chain(rest).map(|s| s.to_string()).collect() };
    for args in [
        with(&["gen", "--out", "lib"]),
        with(&["census", "--library", "lib", "--out", "census.csv"]),
        with(&["sweep", "--library", "lib", "--n", "10", "--out", "results.jsonl"]),
        with(&["interp", "--results", "results.jsonl", "--out", "pstar.csv"]),
        with(&["ls", "--library", "lib", "--variant", "steepest", "--out", "ls_steepest.csv"]),
        with(&["ls", "--library", "lib", "--variant", "firstimp", "--out", "ls_firstimp.csv"]),
        with(&[
            "report",
            "--quantum",
            "results.jsonl",
            "--ls",
            "ls_steepest.csv",
            "--ls",
            "ls_firstimp.csv",
            "--census",
            "census.csv",
            "--out",
            "report",
        ]),
    ] {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(dir, &refs);
    }
}

const OUTPUTS: [&str; 10] = [
    "lib/library.json",
    "census.csv",
    "results.jsonl",
    "pstar.csv",
    "ls_steepest.csv",
    "ls_firstimp.csv",
    "report/comparison.csv",
    "report/fig1_local_optima.csv",
    "report/fig3_sweep.csv",
    "report/fig4_required_iterations.csv",
];

#[test]
fn unknown_subcommand_exits_2_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = qwoa(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        ok(dir.path(), &["gen", "--sizes", "6..8", "--per-size", "5", "--seed", "99", "--out", out]);
    }
    let a = fs::read(dir.path().join("a/library.json")).unwrap();
    let b = fs::read(dir.path().join("b/library.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        fs::read(dir.path().join("a/n07/0003.maxcut")).unwrap(),
        fs::read(dir.path().join("b/n07/0003.maxcut")).unwrap()
    );
}

#[test]
fn full_pipeline_is_deterministic_and_complete() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path());
    pipeline(b.path());
    for f in [
        "report/fig1_local_optima.csv",
        "report/fig3_sweep.csv",
        "report/fig4_required_iterations.csv",
        "report/fig5_comparison.csv",
        "report/fig5_comparison.svg",
    ] {
        assert!(a.path().join(f).is_file(), "missing {f}");
    }
    for f in OUTPUTS {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
    let hash_line = fs::read_to_string(a.path().join("census.csv")).unwrap().lines().next().unwrap().to_string();
    assert!(hash_line.starts_with("# config_hash="));
    for f in ["pstar.csv", "ls_steepest.csv", "report/comparison.csv"] {
        assert!(fs::read_to_string(a.path().join(f)).unwrap().starts_with(&hash_line), "{f}");
    }
    let hash = &hash_line["# config_hash=".len()..];
    let results = fs::read_to_string(a.path().join("results.jsonl")).unwrap();
    assert!(results.lines().all(|l| l.contains(hash)));
    assert!(a.path().join("results.jsonl.manifest.json").is_file());
    assert!(a.path().join("report/run_manifest.json").is_file());
}

#[test]
fn sweep_resumes_without_recomputing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--sizes", "8", "--per-size", "6", "--out", "lib"]);
    ok(d, &["sweep", "--library", "lib", "--n", "8", "--p", "2,3", "--out", "r.jsonl"]);
    let first = fs::read(d.join("r.jsonl")).unwrap();
    ok(d, &["sweep", "--library", "lib", "--n", "8", "--p", "2,3", "--out", "r.jsonl"]);
    assert_eq!(first, fs::read(d.join("r.jsonl")).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 12);
}

#[test]
fn unreachable_target_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--sizes", "8", "--per-size", "4", "--out", "lib"]);
    let out = qwoa(
        d,
        &["sweep", "--library", "lib", "--n", "8", "--target", "0.99", "--p-max", "3", "--out", "r.jsonl"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_or_corrupt_inputs_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(qwoa(d, &["census", "--library", "nowhere", "--out", "c.csv"]).status.code(), Some(4));
    ok(d, &["gen", "--sizes", "6", "--per-size", "2", "--out", "lib"]);
    let f = d.join("lib/n06/0001.maxcut");
    let text = fs::read_to_string(&f).unwrap().replacen("0 ", "1 ", 1);
    fs::write(&f, text).unwrap();
    assert_eq!(qwoa(d, &["census", "--library", "lib", "--out", "c.csv"]).status.code(), Some(4));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.cfg"), "colour = blue\n").unwrap();
    assert_eq!(qwoa(d, &["--config", "bad.cfg", "gen", "--out", "lib"]).status.code(), Some(2));
    assert_eq!(qwoa(d, &["gen", "--edge-prob", "1.5", "--out", "lib"]).status.code(), Some(2));
    assert_eq!(
        qwoa(d, &["gen", "--weight-dist", "gaussian", "--out", "lib"]).status.code(),
        Some(2)
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.cfg"), "sizes = 6\nper_size = 3\nseed = 5\n").unwrap();
    ok(d, &["--config", "run.cfg", "gen", "--per-size", "2", "--out", "lib"]);
    let manifest = fs::read_to_string(d.join("lib/library.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["config"]["per_size"], 2);
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["instances"].as_array().unwrap().len(), 2);
}

#[test]
fn report_rejects_mixed_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--sizes", "8", "--per-size", "3", "--out", "lib"]);
    ok(d, &["sweep", "--library", "lib", "--n", "8", "--p", "2", "--out", "r.jsonl"]);
    ok(d, &["ls", "--library", "lib", "--variant", "steepest", "--runs", "50", "--out", "ls.csv"]);
    let out = qwoa(d, &["report", "--quantum", "r.jsonl", "--ls", "ls.csv", "--out", "rep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hash"));
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--sizes", "8", "--per-size", "4", "--out", "lib"]);
    let mut files = Vec::new();
    for (threads, out) in [("1", "a.jsonl"), ("2", "b.jsonl")] {
        let status = Command::new(env!("CARGO_BIN_EXE_qwoa"))
            .current_dir(d)
            .env("QWOA_THREADS", threads)
            .args(["sweep", "--library", "lib", "--n", "8", "--p", "2", "--out", out])
            .status()
            .unwrap();
        assert!(status.success());
        files.push(fs::read(d.join(out)).unwrap());
    }
    assert_eq!(files[0], files[1]);
}
