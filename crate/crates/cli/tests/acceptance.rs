//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by the
//! measured values, and exits nonzero if any criterion fails.
//!
//! Run with `cargo test -p skewguard-cli --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use skewguard::dataio::Dataset;
use skewguard::mcd::{fast_mcd, subset_size, McdConfig, StartPlan};
use skewguard::metrics::{pr_auprc, roc_auc};
use skewguard::numkit::{cholesky, covariance, covariance_of_rows, mvn_sample, Matrix, RngStream, SymMatrix};
use skewguard::resample::{rob_rose, KernelSampler, Method, OversampleConfig};
use skewguard::simbench::{illustration_dataset, run_benchmark, Arm, BenchConfig, BenchReport, SimSpec};

const SEED: u64 = 1;
const ARMS: [Arm; 4] = Arm::ALL;
const SMOTE: Arm = Arm::Oversampled(Method::Smote);
const ROSE: Arm = Arm::Oversampled(Method::Rose);
const ROBROSE: Arm = Arm::Oversampled(Method::RobRose);

type Criterion = fn() -> Outcome;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    details: Vec<String>,
}

fn auc(r: &BenchReport, setting: u8, n0: usize, arm: Arm) -> f64 {
    r.cell(setting, n0, arm).expect("cell").auc().mean
}

fn auprc(r: &BenchReport, setting: u8, n0: usize, arm: Arm) -> f64 {
    r.cell(setting, n0, arm).expect("cell").auprc().mean
}

/// Settings 1 and 2 at n0 ∈ {900, 1900, 9900}, 100 repetitions, every arm.
fn full_grid(p: usize) -> (BenchReport, Duration) {
    let mut grid = Vec::new();
    for setting in [1u8, 2] {
        for n0 in [900, 1900, 9900] {
            grid.push(SimSpec::for_setting(setting, p, n0).unwrap().with_seed(SEED));
        }
    }
    let t = Instant::now();
    let r = run_benchmark(&grid, &ARMS, &BenchConfig::default()).expect("benchmark");
    (r, t.elapsed())
}

fn criterion_1(grids: &[(usize, BenchReport)], single_thread: Duration) -> Outcome {
    let target = [
        (Arm::Imbalanced, 0.647),
        (SMOTE, 0.679),
        (ROSE, 0.677),
        (ROBROSE, 0.824),
    ];
    let mut pass = single_thread < Duration::from_secs(120);
    let mut details = Vec::new();
    for (p, r) in grids {
        let mut line = format!("p={p}:");
        for (arm, want) in target {
            let got = auc(r, 2, 900, arm);
            let ok = (got - want).abs() <= 0.04;
            pass &= ok;
            line.push_str(&format!(
                " {arm} {got:.3} (target {want:.3}{})",
                if ok { "" } else { ", off" }
            ));
        }
        let gap = auc(r, 2, 900, ROBROSE) - auc(r, 2, 900, ROSE);
        pass &= gap >= 0.10;
        line.push_str(&format!("; robrose-rose {gap:.3} (need >= 0.10)"));
        details.push(line);
        let rr = r.cell(2, 900, ROBROSE).unwrap().auc_values();
        let ro = r.cell(2, 900, ROSE).unwrap().auc_values();
        let wins = rr.iter().zip(&ro).filter(|(a, b)| a > b).count();
        details.push(format!(
            "p={p}: paired robrose > rose in {wins} of {} repetitions",
            rr.len()
        ));
    }
    details.push(format!(
        "single-threaded run of this cell at p=10: {:.1}s (limit 120s)",
        single_thread.as_secs_f64()
    ));
    Outcome {
        id: "1",
        title: "setting 2 AUC, n0=900, within 0.04 of target and robROSE-ROSE >= 0.10",
        pass,
        details,
    }
}

fn criterion_2(grids: &[(usize, BenchReport)]) -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (p, r) in grids {
        let rr = auprc(r, 2, 900, ROBROSE);
        let ro = auprc(r, 2, 900, ROSE);
        let ok = (rr - 0.225).abs() <= 0.05 && (ro - 0.160).abs() <= 0.05 && rr - ro >= 0.03;
        pass &= ok;
        details.push(format!(
            "p={p}: robrose {rr:.3} (target 0.225), rose {ro:.3} (target 0.160), difference {:.3} (need >= 0.03)",
            rr - ro
        ));
    }
    Outcome {
        id: "2",
        title: "setting 2 AUPRC, n0=900, within 0.05 of target and robROSE-ROSE >= 0.03",
        pass,
        details,
    }
}

fn criterion_3(grids: &[(usize, BenchReport)]) -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (p, r) in grids {
        let vals: Vec<f64> = ARMS.iter().map(|&a| auc(r, 1, 900, a)).collect();
        let in_band = vals.iter().all(|v| (0.80..=0.86).contains(v));
        let over = &vals[1..];
        let spread =
            over.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - over.iter().cloned().fold(f64::INFINITY, f64::min);
        pass &= in_band && spread <= 0.01;
        details.push(format!(
            "p={p}: imbalanced {:.3}, smote {:.3}, rose {:.3}, robrose {:.3} (band [0.80, 0.86]); oversampler spread {spread:.3} (need <= 0.01)",
            vals[0], vals[1], vals[2], vals[3]
        ));
    }
    Outcome {
        id: "3",
        title: "setting 1 AUC, n0=900, all arms in [0.80, 0.86] and oversampler spread <= 0.01",
        pass,
        details,
    }
}

fn criterion_4(grids: &[(usize, BenchReport)], times: &[(usize, Duration)]) -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (p, r) in grids {
        let rr = auc(r, 2, 9900, ROBROSE);
        let ro = auc(r, 2, 9900, ROSE);
        pass &= rr >= 0.78 && ro <= 0.70;
        details.push(format!(
            "p={p}: robrose {rr:.3} (need >= 0.78), rose {ro:.3} (need <= 0.70)"
        ));
    }
    for (p, t) in times {
        pass &= *t < Duration::from_secs(600);
        details.push(format!(
            "p={p}: full grid, 100 repetitions: {:.1}s (limit 600s)",
            t.as_secs_f64()
        ));
    }
    Outcome {
        id: "4",
        title: "setting 2 AUC at n0=9900: robROSE >= 0.78, ROSE <= 0.70",
        pass,
        details,
    }
}

/// Minimum determinant over all h-subsets, by enumeration.
fn brute_force_min_det(x: &Matrix, h: usize) -> f64 {
    let n = x.rows();
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..h).collect();
    loop {
        best = best.min(covariance_of_rows(x, &idx).1.determinant());
        let mut i = h;
        while i > 0 && idx[i - 1] == n - h + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best;
        }
        idx[i - 1] += 1;
        for j in i..h {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let cfg = McdConfig {
        starts: StartPlan::Exhaustive,
        ..McdConfig::default()
    };
    let mut matches = 0;
    for inst in 0..50u64 {
        let mut rng = RngStream::new(inst, 0x4d);
        let data = (0..24).map(|_| rng.standard_normal()).collect();
        let x = Matrix::from_vec(12, 2, data).unwrap();
        let fit = fast_mcd(&x, &cfg, &RngStream::new(inst, 0)).unwrap();
        if fit.raw_determinant == brute_force_min_det(&x, subset_size(12, 2, 0.5)) {
            matches += 1;
        }
    }
    let elapsed = t.elapsed();
    Outcome {
        id: "5",
        title: "exhaustive-start FastMCD equals brute-force minimum determinant",
        pass: matches == 50 && elapsed < Duration::from_secs(10),
        details: vec![format!(
            "{matches} of 50 instances exact; {:.2}s (limit 10s)",
            elapsed.as_secs_f64()
        )],
    }
}

fn criterion_6() -> Outcome {
    let mut rng = RngStream::new(6, 0);
    let mut worst_auc: f64 = 0.0;
    let mut worst_ap: f64 = 0.0;
    for _ in 0..1000 {
        let n = 2 + rng.index(199);
        let scores: Vec<f64> = (0..n).map(|_| rng.index(30) as f64 / 7.0).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.uniform() < 0.3)).collect();
        labels[0] = 1;
        labels[1] = 0;
        let (mut conc, mut pairs) = (0.0, 0.0);
        for i in (0..n).filter(|&i| labels[i] == 1) {
            for j in (0..n).filter(|&j| labels[j] == 0) {
                pairs += 1.0;
                conc += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
        worst_auc = worst_auc.max((roc_auc(&scores, &labels).unwrap().area - conc / pairs).abs());
        let pos: Vec<usize> = (0..n).filter(|&i| labels[i] == 1).collect();
        let mut ap = 0.0;
        for &i in &pos {
            let above: Vec<usize> = (0..n).filter(|&j| scores[j] >= scores[i]).collect();
            ap += above.iter().filter(|&&j| labels[j] == 1).count() as f64 / above.len() as f64;
        }
        ap /= pos.len() as f64;
        worst_ap = worst_ap.max((pr_auprc(&scores, &labels).unwrap().area - ap).abs());
    }
    Outcome {
        id: "6",
        title: "AUC and AUPRC equal brute-force oracles on 1000 instances",
        pass: worst_auc <= 1e-12 && worst_ap <= 1e-12,
        details: vec![format!(
            "largest deviation: AUC {worst_auc:.1e}, AUPRC {worst_ap:.1e} (limit 1e-12)"
        )],
    }
}

fn criterion_7() -> Outcome {
    let target = SymMatrix::new(Matrix::from_rows(&[[1.0, 0.6], [0.6, 2.0]]).unwrap()).unwrap();
    let l = cholesky(&target).unwrap();
    let mut rng = RngStream::new(7, 0);
    let mut rows = Vec::new();
    for _ in 0..70 {
        rows.push(mvn_sample(&[1.0, 1.0], &l, &mut rng).unwrap());
    }
    for _ in 0..700 {
        rows.push(vec![rng.standard_normal(), rng.standard_normal()]);
    }
    let y = (0..770).map(|i| u8::from(i < 70)).collect();
    let d = Dataset::from_matrix(Matrix::from_rows(&rows).unwrap(), y).unwrap();
    let cfg = OversampleConfig {
        seed: 7,
        ..OversampleConfig::default()
    };
    let r = rob_rose(&d, &cfg, &mut cfg.rng()).unwrap();
    let scatter = &r.fit.as_ref().unwrap().scatter;
    let kernel = r.kernel.clone().unwrap();
    let h2 = kernel.matrix()[(0, 0)] / scatter.matrix()[(0, 0)];
    let sampler = KernelSampler::new(kernel.clone(), vec![0]).unwrap();
    let seed_row = d.x().row(0).to_vec();
    let mut draw_rng = RngStream::new(7, 1);
    let mut draws = Matrix::zeros(0, 2);
    for _ in 0..100_000 {
        draws
            .push_row(&sampler.draw_from(&seed_row, &mut draw_rng).unwrap())
            .unwrap();
    }
    let (_, emp) = covariance(&draws);
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let want = kernel.matrix()[(i, j)];
            worst = worst.max(((emp.matrix()[(i, j)] - want) / want).abs());
        }
    }
    let h2_rel = (h2 - 0.060668).abs() / 0.060668;
    Outcome {
        id: "7",
        title: "empirical covariance of 1e5 kernel draws matches H^2 * robust scatter",
        pass: worst <= 0.05 && h2_rel <= 0.05,
        details: vec![
            format!("largest entrywise relative deviation {:.2}% (limit 5%)", 100.0 * worst),
            format!(
                "H^2 = {h2:.7} at p=2, n1=70, h=0.5 (reference 0.060668, relative difference {:.3}%)",
                100.0 * h2_rel
            ),
        ],
    }
}

fn criterion_8() -> Outcome {
    let ill = illustration_dataset();
    let mut good = 0;
    let mut first_bad = None;
    for seed in 0..100u64 {
        let cfg = OversampleConfig {
            seed,
            ..OversampleConfig::default()
        };
        let r = rob_rose(&ill.data, &cfg, &mut cfg.rng()).unwrap();
        let ok = r.excluded == ill.outcasts && r.seeds.iter().all(|s| !ill.outcasts.contains(s));
        if ok {
            good += 1;
        } else if first_bad.is_none() {
            first_bad = Some((seed, r.excluded.clone()));
        }
    }
    let mut details = vec![format!("{good} of 100 seeds exclude exactly rows {:?}", ill.outcasts)];
    if let Some((s, ex)) = first_bad {
        details.push(format!("seed {s} excluded {ex:?}"));
    }
    Outcome {
        id: "8",
        title: "robROSE excludes exactly the two distant minority points and never seeds from them",
        pass: good == 100,
        details,
    }
}

fn skewguard(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_skewguard"))
        .args(args)
        .env("SKEWGUARD_THREADS", "2")
        .output()
        .expect("run skewguard")
}

fn run_ok(args: &[&str], failures: &mut Vec<String>) {
    let out = skewguard(args);
    if !out.status.success() {
        failures.push(format!(
            "{} exited {:?}: {}",
            args[0],
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
}

fn cli_round(dir: &Path, tag: &str, failures: &mut Vec<String>) -> Vec<(String, Vec<u8>)> {
    let p = |name: &str| dir.join(format!("{tag}-{name}")).to_string_lossy().into_owned();
    run_ok(
        &[
            "simulate",
            "--setting",
            "2",
            "--p",
            "5",
            "--seed",
            "42",
            &p("train.csv"),
            &p("test.csv"),
        ],
        failures,
    );
    // inputs come from the first round so every round sees identical data
    let train = dir.join("a-train.csv").to_string_lossy().into_owned();
    let test = dir.join("a-test.csv").to_string_lossy().into_owned();
    for m in ["smote", "rose", "robrose"] {
        run_ok(
            &[
                "oversample",
                "--method",
                m,
                "--target",
                "10",
                "--seed",
                "42",
                &train,
                &p(&format!("{m}.csv")),
            ],
            failures,
        );
    }
    run_ok(
        &[
            "evaluate",
            "--train",
            &train,
            "--test",
            &test,
            "--method",
            "robrose",
            "--seed",
            "42",
            "--curves",
            &p("curves"),
            "--output",
            &p("eval.csv"),
        ],
        failures,
    );
    run_ok(
        &[
            "evaluate",
            "--data",
            &train,
            "--method",
            "rose",
            "--seed",
            "42",
            "--output",
            &p("cv.csv"),
        ],
        failures,
    );
    run_ok(
        &[
            "bench",
            "--setting",
            "1,2",
            "--n0",
            "300",
            "--p",
            "3",
            "--reps",
            "4",
            "--seed",
            "42",
            "--csv",
            &p("bench.csv"),
            "--table",
            &p("bench.txt"),
            "--per-rep",
            &p("reps.csv"),
        ],
        failures,
    );
    let mut files = Vec::new();
    for name in [
        "train.csv",
        "test.csv",
        "smote.csv",
        "rose.csv",
        "robrose.csv",
        "eval.csv",
        "cv.csv",
        "curves/roc.csv",
        "curves/pr.csv",
        "bench.csv",
        "bench.txt",
        "reps.csv",
    ] {
        let path = dir.join(format!("{tag}-{name}"));
        match fs::read(&path) {
            Ok(b) => files.push((name.to_string(), b)),
            Err(e) => failures.push(format!("missing {}: {e}", path.display())),
        }
    }
    files
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let a = cli_round(dir.path(), "a", &mut failures);
    let b = cli_round(dir.path(), "b", &mut failures);
    let mut differing = Vec::new();
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        if x != y {
            differing.push(name.clone());
        }
    }
    let mut details = vec![format!(
        "{} output files compared across two runs; {} differ",
        a.len().min(b.len()),
        differing.len()
    )];
    details.extend(differing.iter().map(|n| format!("differs: {n}")));
    details.extend(failures.iter().cloned());
    Outcome {
        id: "9",
        title: "CLI commands repeated with the same seed write byte-identical files",
        pass: failures.is_empty() && differing.is_empty() && a.len() == 12,
        details,
    }
}

/// Synthetic file in the credit-card schema: quoted header, Time, V1..V28,
/// Amount and a quoted 0/1 Class column.
fn write_kaggle_like(path: &Path) {
    let mut rng = RngStream::new(10, 0);
    let mut header = vec!["\"Time\"".to_string()];
    header.extend((1..=28).map(|i| format!("\"V{i}\"")));
    header.push("\"Amount\"".into());
    header.push("\"Class\"".into());
    let mut s = header.join(",");
    s.push('\n');
    for i in 0..3000 {
        let fraud = i % 100 == 7;
        let mut row = vec![format!("{}", i * 17)];
        for j in 0..28 {
            let shift = if fraud && j < 4 { -2.5 } else { 0.0 };
            row.push(format!("{}", shift + rng.standard_normal()));
        }
        row.push(format!("{:.2}", (3.0 + 1.5 * rng.standard_normal()).exp()));
        row.push(format!("\"{}\"", u8::from(fraud)));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("creditcard.csv");
    write_kaggle_like(&path);
    let p = path.to_string_lossy().into_owned();
    let out = skewguard(&[
        "evaluate",
        "--data",
        &p,
        "--label",
        "Class",
        "--method",
        "robrose",
        "--cv-folds",
        "2",
        "--cv-repeats",
        "5",
        "--log1p",
        "Amount",
        "--scaling",
        "robust",
        "--seed",
        "3",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let auc_line = stdout.lines().find(|l| l.starts_with("auc,")).unwrap_or("").to_string();
    let fields: Vec<&str> = auc_line.split(',').collect();
    let has_se = fields.len() == 4 && fields[2].parse::<f64>().is_ok_and(|v| v.is_finite());
    Outcome {
        id: "10",
        title: "evaluate ingests the credit-card CSV schema (2-fold CV x 5, robROSE)",
        pass: out.status.success() && has_se && fields[3] == "10",
        details: vec![
            format!("exit {:?}; metrics line '{auc_line}'", out.status.code()),
            String::from_utf8_lossy(&out.stderr)
                .lines()
                .take(2)
                .collect::<Vec<_>>()
                .join(" | "),
        ],
    }
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let want = |id: &str| filter.is_empty() || filter.iter().any(|f| f == id || f == "acceptance");

    let mut outcomes = Vec::new();
    if ["1", "2", "3", "4"].iter().any(|id| want(id)) {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let t = Instant::now();
        single.install(|| {
            let spec = SimSpec::setting2(10, 900).with_seed(SEED);
            run_benchmark(&[spec], &ARMS, &BenchConfig::default()).expect("benchmark")
        });
        let single_thread = t.elapsed();
        let mut grids = Vec::new();
        let mut times = Vec::new();
        for p in [5, 10] {
            let (r, t) = full_grid(p);
            print!("{}", r.to_table());
            grids.push((p, r));
            times.push((p, t));
        }
        outcomes.push(criterion_1(&grids, single_thread));
        outcomes.push(criterion_2(&grids));
        outcomes.push(criterion_3(&grids));
        outcomes.push(criterion_4(&grids, &times));
    }
    let rest: [(&str, Criterion); 6] = [
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
        ("10", criterion_10),
    ];
    for (id, f) in rest {
        if want(id) {
            outcomes.push(f());
        }
    }

    println!();
    let mut failed = 0;
    for o in &outcomes {
        println!(
            "{} criterion {:>2}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title
        );
        for d in &o.details {
            println!("        {d}");
        }
        failed += usize::from(!o.pass);
    }
    println!("\nacceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
