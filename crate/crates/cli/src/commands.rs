use std::fmt::Write as _;
use std::path::Path;

use skewguard::classify::{fit_logit, predict_proba, LogitConfig};
use skewguard::dataio::{
    apply_scaling, fit_scaling, invert_scaling, read_csv, write_atomic, write_csv, Dataset, ScalingMode,
};
use skewguard::metrics::{confusion, pr_auprc, roc_auc, summary_stats};
use skewguard::numkit::{mean, std_dev, RngStream};
use skewguard::resample::{oversample as run_oversampler, rebalance};
use skewguard::simbench::{rep_data, run_benchmark, stratified_folds, Arm, BenchConfig, BenchReport, SimSpec};

use crate::error::CliError;
use crate::{BenchArgs, EvaluateArgs, InputOpts, OversampleArgs, SimulateArgs};

fn load(path: &Path, opts: &InputOpts) -> Result<Dataset, CliError> {
    let cats: Vec<&str> = opts.categorical.iter().map(String::as_str).collect();
    Ok(read_csv(path, &opts.label, &cats)?)
}

pub fn oversample(a: &OversampleArgs) -> Result<(), CliError> {
    let cfg = a.kernel.to_config(a.seed)?;
    let d = load(&a.input, &a.input_opts)?;
    d.check_training()?;
    let spec = fit_scaling(&d, a.input_opts.scaling)?;
    let scaled = apply_scaling(&d, &spec)?;
    let r = run_oversampler(&scaled, a.method, &cfg, &mut cfg.rng())?;
    let z = if a.input_opts.scaling == ScalingMode::None {
        r.z.clone()
    } else {
        let zd = Dataset::from_matrix(r.z.clone(), vec![1; r.z.rows()])?;
        invert_scaling(&zd, &spec)?.x().clone()
    };
    let out = d.append_synthetic(&z, r.z_categorical.as_deref())?;
    write_csv(&out, &a.output, !a.no_provenance)?;

    let n1 = d.class_counts().1;
    eprintln!(
        "{}: minority {} -> {} rows ({} synthetic)",
        a.method,
        n1,
        n1 + r.z.rows(),
        r.z.rows()
    );
    let idx: Vec<String> = r.excluded.iter().map(ToString::to_string).collect();
    eprintln!(
        "excluded {} outlying minority rows: [{}]",
        r.excluded.len(),
        idx.join(",")
    );
    if r.fallback {
        eprintln!("warning: robrose fell back to rose");
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn preprocess(d: Dataset, a: &EvaluateArgs) -> Result<Dataset, CliError> {
    let drop: Vec<&str> = a.drop.iter().map(String::as_str).collect();
    let mut d = if drop.is_empty() { d } else { d.drop_features(&drop)? };
    for name in &a.log1p {
        d = d.log1p_feature(name)?;
    }
    Ok(d)
}

struct FoldScores {
    scores: Vec<f64>,
    labels: Vec<u8>,
    separation: bool,
}

fn fit_and_score(
    train: &Dataset,
    test: &Dataset,
    a: &EvaluateArgs,
    rng: &mut RngStream,
) -> Result<FoldScores, CliError> {
    let spec = fit_scaling(train, a.input_opts.scaling)?;
    let train = apply_scaling(train, &spec)?;
    let test = apply_scaling(test, &spec)?;
    let fitted = match a.method {
        Arm::Imbalanced => train,
        Arm::Oversampled(m) => rebalance(&train, m, &a.kernel.to_config(a.seed)?, rng)?,
    };
    let logit = LogitConfig {
        ridge: a.ridge,
        max_iter: a.max_iter,
        ..LogitConfig::default()
    };
    let model = fit_logit(fitted.x(), fitted.y(), &logit)?;
    Ok(FoldScores {
        scores: predict_proba(&model, test.x())?,
        labels: test.y().to_vec(),
        separation: model.separation,
    })
}

fn se(values: &[f64]) -> f64 {
    if values.len() < 2 {
        f64::NAN
    } else {
        std_dev(values) / (values.len() as f64).sqrt()
    }
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    if !(a.threshold.is_finite()) {
        return Err(CliError::Usage("--threshold must be finite".into()));
    }
    if let Arm::Oversampled(_) = a.method {
        a.kernel.to_config(a.seed)?;
    }
    let mut runs: Vec<FoldScores> = Vec::new();
    // scores pooled for the curves: the test set, or every row once in the first CV repeat
    let pooled: FoldScores;
    match (&a.train, &a.test, &a.data) {
        (Some(tr), Some(te), None) => {
            let train = preprocess(load(tr, &a.input_opts)?, a)?;
            let test = preprocess(load(te, &a.input_opts)?, a)?;
            if train.feature_names() != test.feature_names() {
                return Err(CliError::Usage(
                    "train and test CSVs have different feature columns".into(),
                ));
            }
            train.check_training()?;
            let r = fit_and_score(&train, &test, a, &mut RngStream::new(a.seed, 0))?;
            pooled = FoldScores {
                scores: r.scores.clone(),
                labels: r.labels.clone(),
                separation: r.separation,
            };
            runs.push(r);
        }
        (None, None, Some(path)) => {
            if a.cv_folds < 2 || a.cv_repeats == 0 {
                return Err(CliError::Usage("need --cv-folds >= 2 and --cv-repeats >= 1".into()));
            }
            let d = preprocess(load(path, &a.input_opts)?, a)?;
            d.check_training()?;
            let base = RngStream::new(a.seed, 0);
            let mut first = FoldScores {
                scores: vec![f64::NAN; d.n()],
                labels: d.y().to_vec(),
                separation: false,
            };
            for rep in 0..a.cv_repeats {
                let folds = stratified_folds(d.y(), a.cv_folds, &mut base.fork(rep as u64))?;
                for (f, test_idx) in folds.iter().enumerate() {
                    let train_idx: Vec<usize> = (0..d.n()).filter(|i| test_idx.binary_search(i).is_err()).collect();
                    let train = d.select_rows(&train_idx);
                    train.check_training()?;
                    let test = d.select_rows(test_idx);
                    let mut rng = base.fork(rep as u64).fork(f as u64 + 1);
                    let r = fit_and_score(&train, &test, a, &mut rng)?;
                    if rep == 0 {
                        for (k, &i) in test_idx.iter().enumerate() {
                            first.scores[i] = r.scores[k];
                        }
                        first.separation |= r.separation;
                    }
                    runs.push(r);
                }
            }
            pooled = first;
        }
        _ => {
            return Err(CliError::Usage("give either --train and --test, or --data".into()));
        }
    }

    let mut aucs = Vec::new();
    let mut auprcs = Vec::new();
    let mut stats: Vec<[f64; 4]> = Vec::new();
    for r in &runs {
        if r.separation {
            eprintln!("warning: complete separation in a logistic fit; scores come from the last iterate");
        }
        aucs.push(roc_auc(&r.scores, &r.labels)?.area);
        auprcs.push(pr_auprc(&r.scores, &r.labels)?.area);
        let s = summary_stats(&confusion(&r.scores, &r.labels, a.threshold)?);
        stats.push([s.accuracy, s.precision, s.recall, s.f1]);
    }
    let mut table = String::from("metric,mean,se,n\n");
    let n = runs.len();
    let mut row = |name: &str, v: &[f64]| {
        let _ = writeln!(table, "{name},{},{},{n}", mean(v), se(v));
    };
    row("auc", &aucs);
    row("auprc", &auprcs);
    for (j, name) in ["accuracy", "precision", "recall", "f1"].iter().enumerate() {
        let col: Vec<f64> = stats.iter().map(|s| s[j]).collect();
        row(name, &col);
    }
    print!("{table}");
    if let Some(path) = &a.output {
        write_atomic(path, table.as_bytes())?;
    }
    if let Some(dir) = &a.curves {
        std::fs::create_dir_all(dir).map_err(|e| skewguard::dataio::DataError::Io {
            path: dir.clone(),
            source: e,
        })?;
        roc_auc(&pooled.scores, &pooled.labels)?.write_csv(dir.join("roc.csv"))?;
        pr_auprc(&pooled.scores, &pooled.labels)?.write_csv(dir.join("pr.csv"))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sim_spec(
    setting: u8,
    p: usize,
    n0: usize,
    n1: usize,
    split: f64,
    eps: Option<f64>,
    reps: usize,
    seed: u64,
) -> Result<SimSpec, CliError> {
    let mut s = SimSpec::for_setting(setting, p, n0)?
        .with_repetitions(reps)
        .with_seed(seed);
    s.n1 = n1;
    s.split = split;
    if let Some(e) = eps {
        s.contamination = e;
    }
    s.validate()?;
    Ok(s)
}

fn per_rep_csv(report: &BenchReport) -> String {
    let mut s = String::from("setting,p,n0,method,rep,auc,auprc\n");
    for c in &report.cells {
        for (rep, o) in c.outcomes.iter().enumerate() {
            match o {
                Ok(v) => {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{rep},{},{}",
                        c.setting, c.p, c.n0, c.arm, v.auc, v.auprc
                    );
                }
                Err(_) => {
                    let _ = writeln!(s, "{},{},{},{},{rep},,", c.setting, c.p, c.n0, c.arm);
                }
            }
        }
    }
    s
}

pub fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let mut grid = Vec::new();
    for &setting in &a.setting {
        for &p in &a.p {
            for &n0 in &a.n0 {
                grid.push(sim_spec(
                    setting,
                    p,
                    n0,
                    a.n1,
                    a.split,
                    a.contamination,
                    a.reps,
                    a.seed,
                )?);
            }
        }
    }
    let cfg = BenchConfig {
        oversample: a.kernel.to_config(a.seed)?,
        ..BenchConfig::default()
    };
    let report = run_benchmark(&grid, &a.methods, &cfg)?;
    let table = report.to_table();
    write_atomic(&a.csv, report.to_csv_string().as_bytes())?;
    write_atomic(&a.table, table.as_bytes())?;
    if let Some(path) = &a.per_rep {
        write_atomic(path, per_rep_csv(&report).as_bytes())?;
    }
    print!("{table}");
    for c in &report.cells {
        if c.n_excluded() > 0 {
            eprintln!(
                "warning: setting {}, p = {}, n0 = {}, {}: {} repetitions excluded",
                c.setting,
                c.p,
                c.n0,
                c.arm,
                c.n_excluded()
            );
        }
    }
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let spec = sim_spec(a.setting, a.p, a.n0, a.n1, a.split, a.contamination, a.rep + 1, a.seed)?;
    let (train, test) = rep_data(&spec, a.rep)?;
    write_csv(&train, &a.train_out, false)?;
    write_csv(&test, &a.test_out, false)?;
    let (n0, n1) = train.class_counts();
    let (m0, m1) = test.class_counts();
    eprintln!("train: {n0} majority, {n1} minority; test: {m0} majority, {m1} minority");
    Ok(())
}
