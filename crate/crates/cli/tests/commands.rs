use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn idgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idgen"))
        .args(args)
        .output()
        .unwrap()
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr)
}

fn catalog(dir: &Path) {
    let o = idgen(&["catalog", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o));
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn identify_prints_the_frontdoor_formula() {
    let dir = tempfile::tempdir().unwrap();
    catalog(dir.path());
    let o = idgen(&[
        "identify",
        "--graph",
        &p(dir.path(), "frontdoor.graph"),
        "--query",
        &p(dir.path(), "frontdoor_1.query"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(
        out.starts_with("Σ_{s} P(s|x) · Σ_{x'} P(x') P(r|x',s)\n"),
        "{out}"
    );
    assert!(out.contains("S4"));
}

#[test]
fn bow_reports_a_hedge_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    catalog(dir.path());
    let args = [
        "--graph",
        &p(dir.path(), "bow.graph"),
        "--query",
        &p(dir.path(), "bow_1.query"),
    ];
    let o = idgen(&[&["identify"][..], &args].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(
        text(&o).contains("hedge F = {X, Y}, F' = {Y}"),
        "{}",
        text(&o)
    );
    let data = p(dir.path(), "bow.csv");
    let g = idgen(&[
        "gen-data",
        "--scm",
        &p(dir.path(), "bow.scm"),
        "--n",
        "100",
        "--out",
        &data,
    ]);
    assert!(g.status.success());
    let o = idgen(&[&["sample", "--data", &data][..], &args].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("hedge"));
}

#[test]
fn malformed_graph_exits_one_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    catalog(dir.path());
    let bad = p(dir.path(), "bad.graph");
    fs::write(&bad, "var X 2\nvar Y 2\nedge X => Y\n").unwrap();
    let o = idgen(&[
        "identify",
        "--graph",
        &bad,
        "--query",
        &p(dir.path(), "bow_1.query"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("line 3"), "{}", text(&o));
}

#[test]
fn bad_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    catalog(dir.path());
    let o = idgen(&[
        "sample",
        "--scm",
        &p(dir.path(), "napkin.scm"),
        "--query",
        &p(dir.path(), "napkin_1.query"),
        "--n",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = idgen(&["sample", "--query", &p(dir.path(), "napkin_1.query")]);
    assert_eq!(o.status.code(), Some(1));
    let o = idgen(&[
        "sample",
        "--scm",
        "missing.scm",
        "--query",
        &p(dir.path(), "napkin_1.query"),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sample_is_byte_identical_under_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    catalog(dir.path());
    let run = |out: &str, workers: &str| {
        let o = idgen(&[
            "sample",
            "--scm",
            &p(dir.path(), "crossed.scm"),
            "--query",
            &p(dir.path(), "crossed_1.query"),
            "--data-n",
            "20000",
            "--n",
            "5000",
            "--seed",
            "4",
            "--workers",
            workers,
            "--out",
            out,
        ]);
        assert!(o.status.success(), "{}", text(&o));
        (
            fs::read(out).unwrap(),
            fs::read(format!("{out}.network")).unwrap(),
        )
    };
    let a = run(&p(dir.path(), "a.csv"), "1");
    let b = run(&p(dir.path(), "b.csv"), "3");
    assert_eq!(a, b);
    let csv = String::from_utf8(a.0).unwrap();
    assert_eq!(csv.lines().next(), Some("Y"));
    assert_eq!(csv.lines().count(), 5001);
}

#[test]
fn sample_reads_a_graph_and_dataset() {
    let dir = tempfile::tempdir().unwrap();
    catalog(dir.path());
    let data = p(dir.path(), "obs.csv");
    let o = idgen(&[
        "gen-data",
        "--scm",
        &p(dir.path(), "chain.scm"),
        "--n",
        "20000",
        "--seed",
        "1",
        "--out",
        &data,
    ]);
    assert!(o.status.success());
    let o = idgen(&[
        "sample",
        "--graph",
        &p(dir.path(), "chain.graph"),
        "--data",
        &data,
        "--query",
        &p(dir.path(), "chain_1.query"),
        "--n",
        "10",
        "--proposal",
        "marginal",
    ]);
    assert!(o.status.success(), "{}", text(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 11);
    assert!(out.lines().skip(1).all(|l| l == "0" || l == "1"));
}

#[test]
fn gen_data_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    catalog(dir.path());
    let scm = p(dir.path(), "frontdoor.scm");
    let a = idgen(&["gen-data", "--scm", &scm, "--n", "10", "--seed", "3"]);
    let b = idgen(&["gen-data", "--scm", &scm, "--n", "10", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = String::from_utf8(a.stdout).unwrap();
    assert_eq!(out.lines().next(), Some("X,S,R"));
    assert_eq!(out.lines().count(), 11);
}

#[test]
fn eval_marks_non_identifiable_rows() {
    let dir = tempfile::tempdir().unwrap();
    catalog(dir.path());
    let o = idgen(&[
        "eval",
        "--scm",
        &p(dir.path(), "bow.scm"),
        "--query",
        &p(dir.path(), "bow_1.query"),
        "--data-n",
        "1000",
        "--n",
        "1000",
    ]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("| HEDGE |"));
}
