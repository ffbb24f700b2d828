use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewguard"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn simulated(dir: &Path) -> (PathBuf, PathBuf) {
    let (tr, te) = (dir.join("train.csv"), dir.join("test.csv"));
    let out = run(&[
        "simulate",
        "--setting",
        "2",
        "--p",
        "3",
        "--n0",
        "300",
        "--seed",
        "5",
        &s(&tr),
        &s(&te),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (tr, te)
}

#[test]
fn help_shows_a_default_for_every_flag() {
    for sub in ["oversample", "evaluate", "bench", "simulate"] {
        let out = run(&[sub, "--help"]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        for line in text.lines().filter(|l| l.trim_start().starts_with("--")) {
            assert!(line.contains("[default:"), "{sub}: {line}");
        }
    }
}

#[test]
fn usage_errors_exit_1() {
    let out = run(&["oversample", "--bogus", "a", "b"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error[Usage]:"));
    assert_eq!(err.lines().count(), 1);
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.csv");
    fs::write(&f, "a,b,class\n1,2,0\n3,4,7\n").unwrap();
    let out = run(&["oversample", &s(&f), &s(&dir.path().join("o.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error["));
    assert!(!dir.path().join("o.csv").exists());

    let out = run(&[
        "oversample",
        &s(&dir.path().join("missing.csv")),
        &s(&dir.path().join("o.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversample_appends_synthetic_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (tr, _) = simulated(dir.path());
    let out_path = dir.path().join("over.csv");
    let out = run(&[
        "oversample",
        "--method",
        "rose",
        "--target",
        "3",
        &s(&tr),
        &s(&out_path),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&out_path).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.ends_with(",synthetic"));
    let synth = text.lines().skip(1).filter(|l| l.ends_with(",1")).count();
    // 70 training minority rows grown to 210
    assert_eq!(synth, 140);
    let input_rows = fs::read_to_string(&tr).unwrap().lines().count() - 1;
    assert_eq!(text.lines().count() - 1, input_rows + 140);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let (tr, _) = simulated(dir.path());
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# settings\nmethod = smote\ntarget = 2\nno_provenance = true\n").unwrap();
    let a = dir.path().join("a.csv");
    let out = run(&["oversample", "--config", &s(&cfg), &s(&tr), &s(&a)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("smote"), "{stderr}");
    assert!(!fs::read_to_string(&a)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .contains("synthetic"));

    let b = dir.path().join("b.csv");
    let out = run(&["oversample", "--config", &s(&cfg), "--method", "rose", &s(&tr), &s(&b)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rose"));

    fs::write(&cfg, "not_a_flag = 3\n").unwrap();
    let out = run(&["oversample", "--config", &s(&cfg), &s(&tr), &s(&b)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn evaluate_writes_metrics_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let (tr, te) = simulated(dir.path());
    let curves = dir.path().join("curves");
    let metrics = dir.path().join("m.csv");
    let out = run(&[
        "evaluate",
        "--train",
        &s(&tr),
        "--test",
        &s(&te),
        "--method",
        "robrose",
        "--curves",
        &s(&curves),
        "--output",
        &s(&metrics),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&metrics).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
    assert!(text.starts_with("metric,mean,se,n\nauc,"));
    let roc = fs::read_to_string(curves.join("roc.csv")).unwrap();
    assert!(roc.starts_with("# kind=roc area="));
    assert!(fs::read_to_string(curves.join("pr.csv"))
        .unwrap()
        .starts_with("# kind=pr area="));
    // no temporary files left behind
    let stray: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp"))
        .collect();
    assert!(stray.is_empty());
}

#[test]
fn bench_output_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let csv = dir.path().join(format!("b{threads}.csv"));
        let out = bin()
            .env("SKEWGUARD_THREADS", threads)
            .args([
                "bench",
                "--setting",
                "2",
                "--n0",
                "200",
                "--p",
                "2",
                "--reps",
                "3",
                "--seed",
                "8",
            ])
            .args(["--csv", &s(&csv), "--table", &s(&dir.path().join("t.txt"))])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(fs::read(&csv).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert!(text.starts_with("setting,n0,method,metric,mean,se,n_excluded\n"));
    assert_eq!(text.lines().count(), 1 + 4 * 2);

    let out = bin()
        .env("SKEWGUARD_THREADS", "zero")
        .args(["bench", "--reps", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
