use std::fs;
use std::process::{Command, Output};

use dlc::cli;
use dlc::data::write_csv;
use dlc_core::train::{blobs, BlobSpec};
use tempfile::tempdir;

fn dlc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn help(sub: &str) -> String {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args: Vec<&str> = if sub.is_empty() { vec!["dlc", "--help"] } else { vec!["dlc", sub, "--help"] };
    assert_eq!(cli::run(args, &mut out, &mut err), 0);
    String::from_utf8(out).unwrap()
}

#[test]
fn help_texts() {
    insta::assert_snapshot!("dlc", help(""));
    for sub in ["consistency", "analyze", "gradcheck", "eval", "attack", "train"] {
        insta::assert_snapshot!(sub, help(sub));
    }
}

#[test]
fn exit_codes() {
    assert_eq!(dlc(&[]).status.code(), Some(2));
    assert_eq!(dlc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(dlc(&["eval", "--logic", "nonsense", "--formula", "P"]).status.code(), Some(2));
    assert_eq!(dlc(&["eval", "--logic", "godel", "--formula", "P", "--assign", "P"]).status.code(), Some(2));
    let missing_dir = dlc(&["gradcheck", "--logic", "dl2", "--out", "/nonexistent/dir/x.txt"]);
    assert_eq!(missing_dir.status.code(), Some(2));
    assert!(stderr(&missing_dir).contains("Usage: dlc gradcheck"));
    // well-formed but unsatisfiable requests are domain errors
    assert_eq!(dlc(&["consistency", "--budget", "10"]).status.code(), Some(1));
    assert_eq!(dlc(&["eval", "--logic", "godel", "--formula", "P & Q", "--assign", "P=0.1"]).status.code(), Some(1));
    assert_eq!(dlc(&["eval", "--logic", "godel", "--formula", "P &", "--assign", "P=0.1"]).status.code(), Some(1));
    assert_eq!(dlc(&["train", "--data", "csv", "--train-csv", "a.csv"]).status.code(), Some(2));
    assert_eq!(dlc(&["train", "--batch-size", "0"]).status.code(), Some(1));
    assert_eq!(dlc(&["--version"]).status.code(), Some(0));
}

#[test]
fn eval_examples() {
    let o = dlc(&["eval", "--logic", "godel", "--formula", "P | !P", "--assign", "P=0.3"]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "0.7\n".into()));
    let o = dlc(&["eval", "--logic", "reichenbach", "--formula", "P -> Q", "--assign", "P=0.5,Q=0.25"]);
    assert_eq!(stdout(&o), "0.625\n");
    // DL2: 0 is true; the loss is the truth value itself
    let o = dlc(&[
        "eval", "--logic", "dl2", "--formula", "N(xadv)[0] >= 0.5 | x0[1] <= 0.1",
        "--assign", "N(xadv)[0]=0.25", "--assign", "x0[1]=0.5", "--format", "records",
    ]);
    assert_eq!(stdout(&o), "logic=dl2 truth=0.1 loss=0.1\n");
    let o = dlc(&["eval", "--logic", "lukasiewicz", "--formula", "forall_ball(0.1): P & P", "--assign", "P=0.7", "--format", "csv"]);
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[1].parse::<f64>().unwrap() - 0.4).abs() < 1e-12);
    assert!((row[2].parse::<f64>().unwrap() - 0.6).abs() < 1e-12);
}

#[test]
fn gradcheck_reports() {
    let o = dlc(&["gradcheck", "--logic", "reichenbach"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with("ok")).count(), 11);
    assert!(text.lines().last().unwrap().starts_with("max relative error: "));
    let o = dlc(&["gradcheck", "--logic", "godel", "--format", "csv", "--points", "20"]);
    assert!(stdout(&o).starts_with("logic,check,points,max_error,tolerance,passed\n"), "{}", stdout(&o));
}

#[test]
fn shadow_lifting_report() {
    let o = dlc(&["analyze", "shadow-lifting", "--logic", "lukasiewicz"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("✗"), "{text}");
    let rho: f64 = text.split("rho=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(rho < 0.5);
    let o = dlc(&["analyze", "shadow-lifting", "--logic", "reichenbach", "--format", "records"]);
    assert!(stdout(&o).contains("shadow_lifting=true"), "{}", stdout(&o));
    assert_eq!(dlc(&["analyze", "shadow-lifting", "--rho-samples", "10"]).status.code(), Some(1));
}

#[test]
fn implication_report_and_grid() {
    let dir = tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let o = dlc(&["analyze", "implication", "--logic", "reichenbach", "--spacing", "0.05", "--grid-out", grid.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("reichenbach: MP ✓  MT ✓"), "{}", stdout(&o));
    let grid = fs::read_to_string(grid).unwrap();
    assert_eq!(grid.lines().count(), 1 + 20 * 20);
    for line in grid.lines().skip(1) {
        let v: Vec<f64> = line.split(',').skip(1).map(|s| s.parse().unwrap()).collect();
        assert!((v[2] - (v[1] - 1.0)).abs() < 1e-12 && (v[3] - v[0]).abs() < 1e-12);
    }
}

#[test]
fn consistency_table_files() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let o = dlc(&["consistency", "--logics", "godel,reichenbach", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 22 + 1);
    assert_eq!(lines[0], "group,tautology,Gödel,Reichenbach");
    assert!(lines[9].ends_with("P | !P,0.750000,0.833331"), "{}", lines[9]);
    assert!(lines[23].starts_with(",Average,"));
    let errors = fs::read_to_string(dir.path().join("table.errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 23);
    let o = dlc(&["consistency", "--logic", "yager", "--suite", "classical", "--method", "monte-carlo", "--budget", "2000", "--format", "records"]);
    assert_eq!(stdout(&o).lines().count(), 22 + 1);
    assert_eq!(dlc(&["consistency", "--logics", "dl2"]).status.code(), Some(2));
}

#[test]
fn train_attack_and_checkpoint() {
    let dir = tempdir().unwrap();
    let model = dir.path().join("m.bin");
    let metrics = dir.path().join("m.csv");
    let o = dlc(&[
        "train", "--epochs", "3", "--constraint", "groups", "--logic", "reichenbach", "--hidden", "8",
        "--checkpoint", model.to_str().unwrap(), "--format", "csv", "--out", metrics.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&metrics).unwrap().lines().count(), 4);
    let o = dlc(&["attack", "--checkpoint", model.to_str().unwrap(), "--input", "0.5,0.5", "--format", "records"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec = stdout(&o);
    let x: Vec<f64> = rec.split_whitespace().next().unwrap().trim_start_matches("x=").split(',').map(|v| v.parse().unwrap()).collect();
    assert!(x.iter().all(|v| (v - 0.5).abs() <= 0.1 + 1e-12));
    assert_eq!(dlc(&["attack", "--checkpoint", model.to_str().unwrap(), "--input", "0.5"]).status.code(), Some(1));
    assert_eq!(dlc(&["attack", "--checkpoint", "/nonexistent", "--input", "0.5"]).status.code(), Some(1));
}

#[test]
fn train_from_config_and_csv() {
    let dir = tempdir().unwrap();
    let (train, test) = blobs(&BlobSpec { train_per_class: 20, test_per_class: 5, ..BlobSpec::default() }).unwrap();
    let (a, b) = (dir.path().join("train.csv"), dir.path().join("test.csv"));
    write_csv(&a, &train).unwrap();
    write_csv(&b, &test).unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "epochs = 2\nhidden = [6]\n[constraint]\nkind = \"class-similarity\"\n").unwrap();
    let o = dlc(&[
        "train", "--config", cfg.to_str().unwrap(), "--data", "csv", "--train-csv", a.to_str().unwrap(),
        "--test-csv", b.to_str().unwrap(), "--format", "records",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(stderr(&o).contains("class-similarity"));
    // a flag wins over the file
    let o = dlc(&["train", "--config", cfg.to_str().unwrap(), "--epochs", "1", "--train-per-class", "10", "--format", "records"]);
    assert_eq!(stdout(&o).lines().count(), 1);
    fs::write(&cfg, "epoch = 2\n").unwrap();
    assert_eq!(dlc(&["train", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn baseline_metrics_ignore_the_logic() {
    let run = |logic: &str| stdout(&dlc(&["train", "--baseline", "--epochs", "2", "--train-per-class", "20", "--logic", logic, "--format", "records"]));
    let a = run("godel");
    assert_eq!(a, run("dl2"));
    assert!(a.contains("lambda_ce=1 lambda_c=0"));
}

#[test]
fn metrics_files_are_reproducible() {
    let dir = tempdir().unwrap();
    for format in ["csv", "records", "text"] {
        let files: Vec<Vec<u8>> = (0..2)
            .map(|i| {
                let p = dir.path().join(format!("{format}{i}"));
                let o = dlc(&["train", "--epochs", "2", "--train-per-class", "30", "--seed", "5", "--format", format, "--out", p.to_str().unwrap()]);
                assert_eq!(o.status.code(), Some(0));
                fs::read(p).unwrap()
            })
            .collect();
        assert_eq!(files[0], files[1], "{format}");
    }
}
