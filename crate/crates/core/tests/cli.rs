mod common;

use std::fs;

use common::cli::{commands, flashtune, prepare, run_into, snapshot};

fn code(args: &[&str]) -> i32 {
    flashtune(args).status.code().expect("exit code")
}

#[test]
fn each_command_is_reproducible() {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("data");
    prepare(&data);
    for (name, args) in commands() {
        let a = root.path().join(format!("{name}-a"));
        let b = root.path().join(format!("{name}-b"));
        let ra = run_into(&args, &data, &a);
        assert!(ra.status.success(), "{name}: {}", String::from_utf8_lossy(&ra.stderr));
        run_into(&args, &data, &b);
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        assert!(!sa.is_empty(), "{name} wrote nothing");
        assert_eq!(sa, sb, "{name}");
    }
}

#[test]
fn outputs_have_the_expected_files() {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("data");
    prepare(&data);
    let all = commands();
    let find = |n: &str| all.iter().find(|c| c.0 == n).unwrap().1.clone();

    let out = root.path().join("tune");
    let r = run_into(&find("tune"), &data, &out);
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("measurements = 20"), "{stdout}");
    let files: Vec<String> = snapshot(&out).into_keys().collect();
    assert_eq!(files, ["best.csv", "trace.csv", "tree.txt"]);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 21);

    let out = root.path().join("experiment");
    run_into(&find("experiment"), &data, &out);
    let files: Vec<String> = snapshot(&out).into_keys().collect();
    for f in ["raw.csv", "summary.csv", "rank_difference.csv", "measurements.csv", "report.txt"] {
        assert!(files.contains(&f.to_string()), "{f} missing from {files:?}");
    }
    assert!(!files.contains(&"time.csv".to_string()));
}

#[test]
fn eval_scores_a_front_file() {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("data");
    prepare(&data);
    let m = data.join("bi-objective-tradeoff.toml");
    let d = data.join("bi-objective-tradeoff.csv");
    let front = data.join("front.csv");
    let r = flashtune(&[
        "eval",
        "--manifest",
        m.to_str().unwrap(),
        "--data",
        d.to_str().unwrap(),
        "--front",
        front.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(stdout.contains("front_size = 64"), "{stdout}");
    assert!(stdout.contains("gd = 0\n"), "{stdout}");
    assert!(stdout.contains("igd = 0\n"), "{stdout}");
}

#[test]
fn exit_codes() {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("data");
    prepare(&data);
    let m = data.join("single-peak.toml");
    let d = data.join("single-peak.csv");
    let (m, d) = (m.to_str().unwrap(), d.to_str().unwrap());
    let out = root.path().join("out");
    let out = out.to_str().unwrap();

    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["tune", "--manifest", m]), 1);
    assert_eq!(code(&["tune", "--manifest", m, "--data", "/no/such.csv", "--out", out]), 1);
    assert_eq!(code(&["tune", "--manifest", m, "--data", d, "--size", "0", "--out", out]), 1);
    assert_eq!(code(&["tune", "--manifest", m, "--data", d, "--objective", "nope", "--out", out]), 1);
    assert_eq!(code(&["baseline", "--manifest", m, "--data", d, "--out", out]), 1);
    assert_eq!(code(&["baseline", "--manifest", m, "--data", d, "--method", "magic", "--out", out]), 1);
    assert_eq!(code(&["synth", "--kind", "nope", "--out", out]), 1);
    assert_eq!(code(&["experiment", "--out", out]), 1);
    // a benchmark command that fails is a runtime error, not a usage error
    assert_eq!(code(&["tune", "--manifest", m, "--data", d, "--command", "exit 3", "--out", out]), 2);
    assert_eq!(code(&["tune", "--manifest", m, "--data", d, "--size", "5", "--budget", "5", "--out", out]), 0);
}
