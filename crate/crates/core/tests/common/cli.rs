//! Runs the `flashtune` binary and snapshots what it writes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

pub fn flashtune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flashtune")).args(args).output().expect("binary runs")
}

/// Every file under `dir`, keyed by its path relative to `dir`.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    files
}

/// Writes the two datasets every command below reads.
pub fn prepare(data: &Path) {
    let d = data.to_str().unwrap();
    for (kind, n) in [("single-peak", "8"), ("bi-objective-tradeoff", "6")] {
        let out = flashtune(&["synth", "--kind", kind, "--options", n, "--seed", "5", "--out", d]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

/// One invocation of each command; `{data}` stands for the dataset directory.
pub fn commands() -> Vec<(&'static str, Vec<&'static str>)> {
    let sp = ["--manifest", "{data}/single-peak.toml", "--data", "{data}/single-peak.csv"];
    let mo = ["--manifest", "{data}/bi-objective-tradeoff.toml", "--data", "{data}/bi-objective-tradeoff.csv"];
    let small = ["--size", "10", "--budget", "10", "--seed", "3"];
    let join = |parts: &[&[&'static str]]| parts.concat();
    vec![
        ("synth", vec!["synth", "--kind", "interaction", "--options", "7", "--seed", "2"]),
        ("tune", join(&[&["tune", "--dump-tree"], &sp, &small])),
        ("tune-external", join(&[&["tune", "--command", "echo $(( {o0} * 7 + {o1} * 3 + {o2} + 1 ))"], &sp, &small])),
        ("tune-mo", join(&[&["tune-mo"], &mo, &small])),
        ("baseline-flash", join(&[&["baseline", "--method", "flash"], &sp, &small])),
        ("baseline-progressive", join(&[&["baseline", "--method", "progressive"], &sp, &small])),
        ("baseline-rank", join(&[&["baseline", "--method", "rank"], &sp, &small])),
        ("baseline-random", join(&[&["baseline", "--method", "random", "--random-n", "15"], &sp, &small])),
        ("baseline-epal", join(&[&["baseline", "--method", "epal", "--epsilon", "0.3"], &mo, &small])),
        (
            "experiment",
            vec![
                "experiment",
                "--synthetic",
                "single-peak:7",
                "--synthetic",
                "bi-objective-tradeoff:5",
                "--dataset",
                "{data}/single-peak.toml:{data}/single-peak.csv",
                "--method",
                "flash,progressive,rank,random,epal",
                "--epsilon",
                "0.1,0.3",
                "--init-size",
                "8",
                "--repeats",
                "3",
                "--size",
                "10",
                "--budget",
                "10",
            ],
        ),
    ]
}

/// Runs a command from [`commands`] with its outputs under `out`.
pub fn run_into(args: &[&str], data: &Path, out: &Path) -> Output {
    let d = data.to_str().unwrap();
    let mut full: Vec<String> = args.iter().map(|a| a.replace("{data}", d)).collect();
    full.push("--out".into());
    full.push(out.to_str().unwrap().into());
    let refs: Vec<&str> = full.iter().map(String::as_str).collect();
    flashtune(&refs)
}

/// Runs every command twice and returns the ones whose files differ or that failed.
pub fn nondeterministic_commands(root: &Path) -> Vec<String> {
    let data = root.join("data");
    prepare(&data);
    let mut bad = Vec::new();
    for (name, args) in commands() {
        let a = root.join(format!("{name}-a"));
        let b = root.join(format!("{name}-b"));
        let (ra, rb) = (run_into(&args, &data, &a), run_into(&args, &data, &b));
        if !ra.status.success() || !rb.status.success() {
            bad.push(format!("{name}: failed: {}", String::from_utf8_lossy(&ra.stderr)));
            continue;
        }
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        if sa.is_empty() || sa != sb {
            bad.push(format!("{name}: outputs differ"));
        }
    }
    bad
}
