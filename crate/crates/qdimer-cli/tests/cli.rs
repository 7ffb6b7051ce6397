use std::path::PathBuf;
use std::process::{Command, Output};

fn qdimer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdimer"))
        .args(args)
        .env_remove("QDIMER_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn cycle_partition_function() {
    let o = qdimer(&[
        "zq",
        "--family",
        "cycle",
        "--N",
        "3",
        "--n",
        "2",
        "--identity-q",
        "--cilia",
        "positive",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "q^-1 + 2 + q");
}

#[test]
fn verify_reports_matches_and_sign() {
    let o = qdimer(&[
        "verify",
        "--family",
        "grid2xm",
        "--m",
        "3",
        "--n",
        "2",
        "--random-diagonal",
        "--trials",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("# qdimer verify v1 seed=0"), "{s}");
    assert_eq!(
        s.lines()
            .filter(|l| l.starts_with("random ") && l.contains("match sign="))
            .count(),
        5
    );
    assert!(s.contains("6/6 match"), "{s}");
}

#[test]
fn zigzag_dimer_count() {
    let o = qdimer(&[
        "webs", "--family", "zigzag", "--m", "4", "--n", "1", "--count",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "4");
}

#[test]
fn bigon_with_mixed_cilia() {
    let o = qdimer(&[
        "zq", "--family", "cycle", "--N", "1", "--n", "2", "--cilia", "1,0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "-q^-1 + 2 - q");
}

#[test]
fn invalid_input_exits_with_one() {
    for args in [
        &["zq", "--family", "grid2xm", "--n", "2"][..],
        &["zq", "--family", "hexagon", "--m", "2"][..],
        &["webs", "--family", "square", "--w", "3", "--h", "3"][..],
        &["zq", "--graph", "/nonexistent/graph.json"][..],
        &["frobnicate"][..],
    ] {
        let o = qdimer(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(qdimer(&["--help"]).status.code(), Some(0));
}

#[test]
fn fixed_seed_gives_identical_output() {
    let args = [
        "--seed",
        "17",
        "verify",
        "--family",
        "honeycomb",
        "--a",
        "1",
        "--b",
        "1",
        "--n",
        "3",
        "--random-diagonal",
        "--trials",
        "3",
    ];
    let a = qdimer(&args);
    let b = qdimer(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let mut one = args.to_vec();
    one.splice(0..0, ["--threads", "1"]);
    assert_eq!(qdimer(&one).stdout, a.stdout);
}

#[test]
fn graph_json_round_trip_through_file() {
    let path = scratch("square2x2.json");
    let p = path.to_str().unwrap();
    let g = qdimer(&["-o", p, "gen", "--family", "square", "--w", "2", "--h", "2"]);
    assert_eq!(g.status.code(), Some(0));
    let from_file = qdimer(&["zq", "--graph", p, "--n", "2"]);
    let from_family = qdimer(&[
        "zq", "--family", "square", "--w", "2", "--h", "2", "--n", "2",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_family.stdout);
}

#[test]
fn stats_csv_has_versioned_header_and_summary() {
    let o = qdimer(&[
        "--format", "csv", "stats", "--family", "cycle", "--N", "2", "--n", "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert!(lines.next().unwrap().starts_with("# qdimer stats v1"));
    assert_eq!(lines.next().unwrap(), "multiweb,tr1,X_n,P,P_u");
    assert!(
        s.lines()
            .any(|l| l.starts_with("E,") && l.contains(",1/2,")),
        "{s}"
    );
}

#[test]
fn json_output_parses() {
    let o = qdimer(&[
        "--format", "json", "zq", "--family", "cycle", "--N", "1", "--n", "2",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).expect("valid JSON");
    assert_eq!(v["n"], 2);
}

#[test]
fn qalgebra_selftest_passes() {
    let o = qdimer(&["qalgebra-selftest"]);
    assert_eq!(o.status.code(), Some(0));
    let p = qdimer(&["qalgebra", "selftest"]);
    assert_eq!(o.stdout, p.stdout);
}

#[test]
fn rt_from_graph_agrees() {
    let o = qdimer(&[
        "rt",
        "from-graph",
        "--family",
        "cycle",
        "--N",
        "2",
        "--n",
        "2",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}
