use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ndarray::array;
use partial_label::cli::{EXIT_DATA, EXIT_IO, EXIT_USAGE};
use partial_label::evaluation::friedman_statistic;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_partial-label"))
        .args(args)
        .output()
        .expect("spawn binary")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn stderr_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr)
        .lines()
        .filter(|l| l.starts_with("error "))
        .collect::<Vec<_>>()
        .join("\n")
}

fn write_toy(dir: &Path) {
    fs::write(dir.join("f.tsv"), "0.0\t0.0\n0.1\t0.0\n3.0\t3.0\n").unwrap();
    fs::write(dir.join("c.txt"), "1\n1,2\n2\n").unwrap();
    fs::write(dir.join("t.txt"), "1\n1\n2\n").unwrap();
}

#[test]
fn fit_toy_writes_labels_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_toy(d);
    let before = fs::read(d.join("c.txt")).unwrap();
    let out = bin(&[
        "fit",
        "--features",
        &path(d, "f.tsv"),
        "--candidates",
        &path(d, "c.txt"),
        "--truth",
        &path(d, "t.txt"),
        "--k",
        "2",
        "--out",
        &path(d, "model"),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let labels = fs::read_to_string(d.join("model/labels.csv")).unwrap();
    let rows: Vec<&str> = labels.lines().skip(1).collect();
    assert_eq!(rows, vec!["1,1", "2,1", "3,2"]);
    let trace = fs::read_to_string(d.join("model/trace.csv")).unwrap();
    assert!(trace.starts_with("loop,delta_f,sigma,lagrangian,rowsum_resid,min_entry\n"));
    assert!(trace.lines().count() >= 2);
    let onehot = fs::read_to_string(d.join("model/onehot.tsv")).unwrap();
    assert_eq!(onehot.lines().count(), 3);
    let echo = fs::read_to_string(d.join("model/effective_config.txt")).unwrap();
    assert!(echo.contains("k=2\n") && echo.contains("alpha=1000\n"));
    assert_eq!(
        fs::read(d.join("c.txt")).unwrap(),
        before,
        "inputs untouched"
    );

    let out = bin(&[
        "predict",
        "--model",
        &path(d, "model"),
        "--features",
        &path(d, "f.tsv"),
        "--out",
        &path(d, "pred.csv"),
    ]);
    assert!(out.status.success());
    let preds = fs::read_to_string(d.join("pred.csv")).unwrap();
    let labels: Vec<&str> = preds
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(labels, vec!["1", "1", "2"]);
}

#[test]
fn config_file_supplies_flags_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_toy(d);
    fs::write(
        d.join("run.conf"),
        format!(
            "features={}\ncandidates={}\nk=1\nbeta=0.5\n",
            path(d, "f.tsv"),
            path(d, "c.txt")
        ),
    )
    .unwrap();
    let out = bin(&[
        "--config",
        &path(d, "run.conf"),
        "fit",
        "--k",
        "2",
        "--out",
        &path(d, "m"),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let echo = fs::read_to_string(d.join("m/effective_config.txt")).unwrap();
    assert!(echo.contains("k=2\n"));
    assert!(echo.contains("beta=0.5\n"));
}

#[test]
fn errors_are_single_machine_lines_with_distinct_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();

    let out = bin(&["fit", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(stderr_line(&out).starts_with("error kind=usage code=2 "));

    let out = bin(&[
        "fit",
        "--features",
        &path(d, "missing.tsv"),
        "--candidates",
        "x",
        "--out",
        &path(d, "o"),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_IO));
    let line = stderr_line(&out);
    assert_eq!(line.lines().count(), 1);
    assert!(line.starts_with("error kind=io code=3 message=\""));

    fs::write(d.join("f.tsv"), "0\n1\n").unwrap();
    fs::write(d.join("c.txt"), "1\n,\n").unwrap();
    let out = bin(&[
        "fit",
        "--features",
        &path(d, "f.tsv"),
        "--candidates",
        &path(d, "c.txt"),
        "--out",
        &path(d, "o"),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert!(stderr_line(&out).contains("kind=empty_candidates"));
}

#[test]
fn friedman_matches_library_statistic() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("table.csv"),
        "method,d1,d2,d3,d4\nA,0.9,0.8,0.7,0.6\nB,0.8,0.7,0.6,0.5\nC,0.7,0.6,0.5,0.4\n",
    )
    .unwrap();
    let out = bin(&[
        "friedman",
        "--table",
        &path(d, "table.csv"),
        "--confidence",
        "0.90",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let stat: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("statistic="))
        .unwrap()
        .parse()
        .unwrap();
    let table = array![
        [0.9, 0.8, 0.7, 0.6],
        [0.8, 0.7, 0.6, 0.5],
        [0.7, 0.6, 0.5, 0.4]
    ];
    let (expected, _) = friedman_statistic(&table).unwrap();
    assert!((stat - expected).abs() < 1e-12);
    // Perfectly consistent ranking of 3 methods on 4 datasets.
    assert!((stat - 8.0).abs() < 1e-12);
    assert!(text.contains("reject=true"));
}

#[test]
fn synth_sweep_and_cv_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = bin(&[
        "synth",
        "--n",
        "60",
        "--c",
        "3",
        "--d",
        "2",
        "--sep",
        "5",
        "--p",
        "0.5",
        "--r",
        "1",
        "--seed",
        "3",
        "--out",
        &path(d, "data"),
    ]);
    assert!(out.status.success());
    let manifest = path(d, "data/manifest.txt");
    assert!(fs::read_to_string(&manifest).unwrap().contains("n=60"));

    fs::write(d.join("grid.txt"), "alpha=10,1000\nbeta=0.01\nk=3\n").unwrap();
    let out = bin(&[
        "sweep",
        "--grid",
        &path(d, "grid.txt"),
        "--manifest",
        &manifest,
        "--out",
        &path(d, "sweep"),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let sweep = fs::read_to_string(d.join("sweep/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);

    let out = bin(&[
        "cv",
        "--manifest",
        &manifest,
        "--k",
        "3",
        "--seed",
        "1",
        "--out",
        &path(d, "cv"),
    ]);
    assert!(out.status.success());
    let results = fs::read_to_string(d.join("cv/results.csv")).unwrap();
    assert_eq!(results.lines().next(), Some("fold,train_acc,test_acc"));
    assert_eq!(results.lines().count(), 6);
}
