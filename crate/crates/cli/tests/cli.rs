//! End-to-end runs of the `ferrari` binary over a temp directory.

use std::path::Path;
use std::process::{Command, Output};

fn ferrari(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ferrari"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to spawn binary")
}

fn run_ok(args: &[&str], dir: &Path) -> String {
    let out = ferrari(args, dir);
    assert!(
        out.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn build_query_gen_bench_stats_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    // a=0, b=1, c=2, d=3, e=4 with a comment and CRLF mixed in
    std::fs::write(dir.join("g.txt"), "# six edges\n0 2\r\n0 3\n1 2\n1 3\n2 4\n3 4\n").unwrap();

    let out = run_ok(&["build", "--graph", "g.txt", "--k", "2", "--out", "g.idx"], dir);
    assert!(out.contains("5 nodes"), "unexpected build output: {out}");
    assert!(dir.join("g.idx").exists());

    // deterministic builds produce byte-identical files
    run_ok(&["build", "--graph", "g.txt", "--k", "2", "--out", "g2.idx"], dir);
    assert_eq!(
        std::fs::read(dir.join("g.idx")).unwrap(),
        std::fs::read(dir.join("g2.idx")).unwrap()
    );

    let out = run_ok(&["query", "--index", "g.idx", "--pair", "3", "4"], dir);
    assert_eq!(out.trim(), "3\t4\ttrue");
    let out = run_ok(&["query", "--index", "g.idx", "--pair", "3", "2"], dir);
    assert_eq!(out.trim(), "3\t2\tfalse");

    let out = run_ok(
        &[
            "gen", "--graph", "g.txt", "--count", "25", "--kind", "positive", "--seed", "9",
            "--out", "w.txt",
        ],
        dir,
    );
    assert!(out.contains("25 positive pairs"));
    run_ok(
        &[
            "gen", "--graph", "g.txt", "--count", "25", "--kind", "positive", "--seed", "9",
            "--out", "w2.txt",
        ],
        dir,
    );
    assert_eq!(
        std::fs::read(dir.join("w.txt")).unwrap(),
        std::fs::read(dir.join("w2.txt")).unwrap()
    );

    let out = run_ok(&["query", "--index", "g.idx", "--pairs", "w.txt"], dir);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 25);
    assert!(lines.iter().all(|l| l.ends_with("true")));

    let out = run_ok(
        &[
            "bench",
            "--graph",
            "g.txt",
            "--workload",
            "w.txt",
            "--sweep-k",
            "1,2,5",
            "--threads",
            "2",
            "--csv",
            "r.csv",
        ],
        dir,
    );
    assert_eq!(out.lines().count(), 4, "expected header + 3 rows:\n{out}");
    let csv = std::fs::read_to_string(dir.join("r.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("dataset,mode,k,"));
    // interval totals are non-decreasing across the k sweep
    let intervals: Vec<u64> =
        rows[1..].iter().map(|r| r.split(',').nth(7).unwrap().parse().unwrap()).collect();
    assert!(intervals.windows(2).all(|w| w[0] <= w[1]), "intervals {intervals:?}");

    let out = run_ok(&["stats", "--index", "g.idx"], dir);
    assert!(out.contains("k=2"), "stats output: {out}");
    assert!(out.contains("intervals"));
}

#[test]
fn malformed_inputs_fail_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    std::fs::write(dir.join("bad.txt"), "0 1\nnot an edge\n").unwrap();
    let out = ferrari(&["build", "--graph", "bad.txt", "--out", "x.idx"], dir);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");

    std::fs::write(dir.join("junk.idx"), b"JUNKJUNKJUNK").unwrap();
    let out = ferrari(&["stats", "--index", "junk.idx"], dir);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));

    std::fs::write(dir.join("g.txt"), "0 1\n").unwrap();
    let out = ferrari(&["build", "--graph", "g.txt", "--k", "0", "--out", "x.idx"], dir);
    assert!(!out.status.success());
}
