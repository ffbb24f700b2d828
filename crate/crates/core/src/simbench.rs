//! Simulation settings and the repeated train/test benchmark.
//!
//! Majority rows are N(0, I); minority rows are N(1/3·1, Σ₁) with Σ₁
//! tridiagonal (1 on the diagonal, 0.5 next to it). Setting 2 replaces a
//! fraction of the training minority rows by draws around μ_out.

use std::fmt::{self, Write as _};
use std::path::Path;

use thiserror::Error;

use crate::classify::{fit_logit, predict_proba, ClassifyError, LogitConfig};
use crate::dataio::{write_atomic, DataError, Dataset};
use crate::metrics::{pr_auprc, roc_auc, MetricsError};
use crate::numkit::{cholesky, mvn_sample, LowerTriangular, Matrix, NumError, RngStream, SymMatrix};
use crate::resample::{rebalance, Method, OversampleConfig, ResampleError};

const TAG_GENERATE: u64 = 1;
const TAG_SPLIT: u64 = 2;
const TAG_CONTAMINATE: u64 = 3;
const TAG_OVERSAMPLE: u64 = 16;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid dimension p = {0}, need at least 2")]
    InvalidDimension(usize),
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error("too few rows: {0}")]
    TooFewRows(String),
    #[error("{failed} of {total} fits failed in setting {setting}, n0 = {n0}, {arm}")]
    TooManyFailures {
        setting: u8,
        n0: usize,
        arm: Arm,
        failed: usize,
        total: usize,
    },
    #[error("test partition changed during rebalancing")]
    TestPartitionChanged,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    /// 1 (clean) or 2 (contaminated); used as a label and in the stream key.
    pub setting: u8,
    pub p: usize,
    pub n1: usize,
    pub n0: usize,
    pub contamination: f64,
    pub mu_out: Vec<f64>,
    pub repetitions: usize,
    /// Train fraction.
    pub split: f64,
    pub seed: u64,
}

impl SimSpec {
    pub fn setting1(p: usize, n0: usize) -> Self {
        SimSpec {
            setting: 1,
            p,
            n1: 100,
            n0,
            contamination: 0.0,
            mu_out: default_mu_out(p),
            repetitions: 100,
            split: 0.7,
            seed: 0,
        }
    }

    pub fn setting2(p: usize, n0: usize) -> Self {
        SimSpec {
            setting: 2,
            contamination: 0.1,
            ..SimSpec::setting1(p, n0)
        }
    }

    pub fn for_setting(setting: u8, p: usize, n0: usize) -> Result<Self, SimError> {
        match setting {
            1 => Ok(SimSpec::setting1(p, n0)),
            2 => Ok(SimSpec::setting2(p, n0)),
            s => Err(SimError::InvalidSpec(format!("unknown setting {s} (1 or 2)"))),
        }
    }

    pub fn with_repetitions(mut self, reps: usize) -> Self {
        self.repetitions = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// n₁ / (n₀ + n₁).
    pub fn imbalance_ratio(&self) -> f64 {
        self.n1 as f64 / (self.n0 + self.n1) as f64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.p < 2 {
            return Err(SimError::InvalidDimension(self.p));
        }
        if self.mu_out.len() != self.p {
            return Err(SimError::InvalidSpec(format!(
                "mu_out has {} entries, p = {}",
                self.mu_out.len(),
                self.p
            )));
        }
        if !(0.0..1.0).contains(&self.contamination) {
            return Err(SimError::InvalidSpec(format!(
                "contamination {} outside [0, 1)",
                self.contamination
            )));
        }
        if !(self.split > 0.0 && self.split <= 1.0) {
            return Err(SimError::InvalidSpec(format!(
                "train fraction {} outside (0, 1]",
                self.split
            )));
        }
        if self.n1 == 0 || self.n0 == 0 {
            return Err(SimError::InvalidSpec("both class counts must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(SimError::InvalidSpec("at least one repetition is required".into()));
        }
        Ok(())
    }
}

/// (−10, −2, …, −2).
pub fn default_mu_out(p: usize) -> Vec<f64> {
    (0..p).map(|j| if j == 0 { -10.0 } else { -2.0 }).collect()
}

pub fn minority_mean(p: usize) -> Vec<f64> {
    vec![1.0 / 3.0; p]
}

pub fn minority_scatter(p: usize) -> SymMatrix {
    let mut m = Matrix::identity(p);
    for j in 1..p {
        m[(j, j - 1)] = 0.5;
        m[(j - 1, j)] = 0.5;
    }
    SymMatrix::new(m).expect("tridiagonal matrix is symmetric")
}

fn minority_chol(p: usize) -> Result<LowerTriangular, SimError> {
    Ok(cholesky(&minority_scatter(p))?)
}

/// Minority rows first, then majority rows.
pub fn gen_setting(spec: &SimSpec, rng: &mut RngStream) -> Result<Dataset, SimError> {
    spec.validate()?;
    let p = spec.p;
    let chol = minority_chol(p)?;
    let mu1 = minority_mean(p);
    let mut data = Vec::with_capacity((spec.n0 + spec.n1) * p);
    for _ in 0..spec.n1 {
        data.extend(mvn_sample(&mu1, &chol, rng)?);
    }
    for _ in 0..spec.n0 * p {
        data.push(rng.standard_normal());
    }
    let x = Matrix::from_vec(spec.n1 + spec.n0, p, data)?;
    let y = (0..spec.n1 + spec.n0).map(|i| u8::from(i < spec.n1)).collect();
    Ok(Dataset::from_matrix(x, y)?)
}

/// round(ε·n₁).
pub fn contamination_count(n1: usize, eps: f64) -> usize {
    (eps * n1 as f64).round() as usize
}

/// Replaces uniformly chosen minority rows by N(μ_out, Σ₁) draws. Returns the
/// new dataset and the replaced row indices, ascending.
pub fn contaminate(train: &Dataset, spec: &SimSpec, rng: &mut RngStream) -> Result<(Dataset, Vec<usize>), SimError> {
    spec.validate()?;
    if train.p() != spec.p {
        return Err(DataError::DimensionMismatch {
            expected: spec.p,
            got: train.p(),
        }
        .into());
    }
    let minority = train.minority_indices();
    let count = contamination_count(minority.len(), spec.contamination);
    if count == 0 {
        return Ok((train.clone(), Vec::new()));
    }
    let chol = minority_chol(spec.p)?;
    let mut picked: Vec<usize> = rng
        .sample_distinct(minority.len(), count)
        .into_iter()
        .map(|i| minority[i])
        .collect();
    picked.sort_unstable();
    let mut x = train.x().clone();
    for &i in &picked {
        let z = mvn_sample(&spec.mu_out, &chol, rng)?;
        x.row_mut(i).copy_from_slice(&z);
    }
    let out = Dataset::new(train.feature_names().to_vec(), x, train.y().to_vec())?.with_label_name(train.label_name());
    let out = match train.categorical() {
        Some(c) => out.with_categorical(c.clone())?,
        None => out,
    };
    Ok((out, picked))
}

/// Row indices of a stratified split; each class contributes
/// round(fraction · class count) rows to the training part.
pub fn stratified_split_indices(
    y: &[u8],
    fraction: f64,
    rng: &mut RngStream,
) -> Result<(Vec<usize>, Vec<usize>), SimError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SimError::InvalidSpec(format!(
            "train fraction {fraction} outside (0, 1]"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [0u8, 1] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        if idx.is_empty() {
            return Err(SimError::TooFewRows(format!("class {label} is empty")));
        }
        rng.shuffle(&mut idx);
        let k = (fraction * idx.len() as f64).round() as usize;
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    if test.is_empty() {
        return Err(SimError::TooFewRows("test partition is empty".into()));
    }
    if train.is_empty() {
        return Err(SimError::TooFewRows("training partition is empty".into()));
    }
    Ok((train, test))
}

pub fn stratified_split(d: &Dataset, fraction: f64, rng: &mut RngStream) -> Result<(Dataset, Dataset), SimError> {
    let (train, test) = stratified_split_indices(d.y(), fraction, rng)?;
    Ok((d.select_rows(&train), d.select_rows(&test)))
}

/// Stratified k-fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(y: &[u8], k: usize, rng: &mut RngStream) -> Result<Vec<Vec<usize>>, SimError> {
    if k < 2 {
        return Err(SimError::InvalidSpec(format!("need at least 2 folds, got {k}")));
    }
    let mut folds = vec![Vec::new(); k];
    for label in [0u8, 1] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        if idx.len() < k {
            return Err(SimError::TooFewRows(format!(
                "class {label} has {} rows for {k} folds",
                idx.len()
            )));
        }
        rng.shuffle(&mut idx);
        for (j, i) in idx.into_iter().enumerate() {
            folds[j % k].push(i);
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone)]
pub struct Illustration {
    pub data: Dataset,
    /// Row indices of the two distant minority points.
    pub outcasts: Vec<usize>,
}

/// Two-dimensional toy data: 200 majority rows, a tilted cluster of 30
/// minority rows and two minority points far to the right of it.
pub fn illustration_dataset() -> Illustration {
    let mut rng = RngStream::new(0x1f, 0);
    let cluster =
        cholesky(&SymMatrix::new(Matrix::from_rows(&[[0.30, 0.18], [0.18, 0.20]]).unwrap()).unwrap()).unwrap();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..30 {
        rows.push(mvn_sample(&[-1.5, 1.5], &cluster, &mut rng).unwrap());
        y.push(1);
    }
    rows.push(vec![3.5, 0.2]);
    rows.push(vec![4.0, -0.6]);
    y.extend([1, 1]);
    for _ in 0..200 {
        rows.push(vec![
            1.2 * rng.standard_normal() + 1.0,
            1.2 * rng.standard_normal() - 0.5,
        ]);
        y.push(0);
    }
    let data = Dataset::from_matrix(Matrix::from_rows(&rows).unwrap(), y).unwrap();
    Illustration {
        data,
        outcasts: vec![30, 31],
    }
}

/// A benchmark arm: the untouched training data or one oversampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Imbalanced,
    Oversampled(Method),
}

impl Arm {
    pub const ALL: [Arm; 4] = [
        Arm::Imbalanced,
        Arm::Oversampled(Method::Smote),
        Arm::Oversampled(Method::Rose),
        Arm::Oversampled(Method::RobRose),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Arm::Imbalanced => "imbalanced",
            Arm::Oversampled(m) => m.name(),
        }
    }

    fn tag(self) -> u64 {
        match self {
            Arm::Imbalanced => 0,
            Arm::Oversampled(Method::Smote) => 1,
            Arm::Oversampled(Method::Rose) => 2,
            Arm::Oversampled(Method::RobRose) => 3,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Arm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "imbalanced" | "none" => Ok(Arm::Imbalanced),
            other => other.parse::<Method>().map(Arm::Oversampled),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub oversample: OversampleConfig,
    pub logit: LogitConfig,
    /// Largest tolerated fraction of failed fits per cell.
    pub max_failure_rate: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            oversample: OversampleConfig::default(),
            logit: LogitConfig::default(),
            max_failure_rate: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub auc: f64,
    pub auprc: f64,
}

/// Why one arm of one repetition produced no scores.
#[derive(Debug, Clone, PartialEq)]
pub enum RepFailure {
    Resample(String),
    Classify(ClassifyError),
    Separation,
    Metrics(MetricsError),
}

impl fmt::Display for RepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepFailure::Resample(e) => write!(f, "resampling failed: {e}"),
            RepFailure::Classify(e) => write!(f, "logistic fit failed: {e}"),
            RepFailure::Separation => f.write_str("complete separation"),
            RepFailure::Metrics(e) => write!(f, "metrics failed: {e}"),
        }
    }
}

/// Per-repetition outcomes of one (setting, n0, arm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub setting: u8,
    pub n0: usize,
    pub p: usize,
    pub imbalance_ratio: f64,
    pub arm: Arm,
    pub outcomes: Vec<Result<Scores, RepFailure>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub se: f64,
}

fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            se: f64::NAN,
        };
    }
    let (mut s, mut ss) = (0.0, 0.0);
    for &v in values {
        s += v;
        ss += v * v;
    }
    let mean = s / n as f64;
    if n < 2 {
        return Summary { mean, se: f64::NAN };
    }
    let var = ((ss - n as f64 * mean * mean) / (n - 1) as f64).max(0.0);
    Summary {
        mean,
        se: (var / n as f64).sqrt(),
    }
}

impl Cell {
    pub fn auc_values(&self) -> Vec<f64> {
        self.outcomes
            .iter()
            .filter_map(|o| o.as_ref().ok().map(|s| s.auc))
            .collect()
    }

    pub fn auprc_values(&self) -> Vec<f64> {
        self.outcomes
            .iter()
            .filter_map(|o| o.as_ref().ok().map(|s| s.auprc))
            .collect()
    }

    pub fn n_excluded(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_err()).count()
    }

    pub fn auc(&self) -> Summary {
        summarize(&self.auc_values())
    }

    pub fn auprc(&self) -> Summary {
        summarize(&self.auprc_values())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub seed: u64,
    pub repetitions: usize,
    pub cells: Vec<Cell>,
}

impl BenchReport {
    pub fn cell(&self, setting: u8, n0: usize, arm: Arm) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.setting == setting && c.n0 == n0 && c.arm == arm)
    }

    /// `setting,n0,method,metric,mean,se,n_excluded`, one line per cell and metric.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("setting,n0,method,metric,mean,se,n_excluded\n");
        for c in &self.cells {
            for (metric, sum) in [("auc", c.auc()), ("auprc", c.auprc())] {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    c.setting,
                    c.n0,
                    c.arm,
                    metric,
                    sum.mean,
                    sum.se,
                    c.n_excluded()
                );
            }
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        write_atomic(path.as_ref(), self.to_csv_string().as_bytes())
    }

    /// One table per setting and metric: rows are n0 values (with the
    /// imbalance ratio), columns are arms, cells are `mean (se)`.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut settings: Vec<(u8, usize)> = Vec::new();
        for c in &self.cells {
            if !settings.contains(&(c.setting, c.p)) {
                settings.push((c.setting, c.p));
            }
        }
        let mut arms: Vec<Arm> = Vec::new();
        for c in &self.cells {
            if !arms.contains(&c.arm) {
                arms.push(c.arm);
            }
        }
        for &(setting, p) in &settings {
            let mut n0s: Vec<usize> = Vec::new();
            for c in self.cells.iter().filter(|c| c.setting == setting && c.p == p) {
                if !n0s.contains(&c.n0) {
                    n0s.push(c.n0);
                }
            }
            for metric in ["AUC", "AUPRC"] {
                let _ = writeln!(
                    out,
                    "Simulation setting {setting}: average {metric} (standard error), p = {p}, {} repetitions, seed {}",
                    self.repetitions, self.seed
                );
                let _ = write!(out, "{:>6} {:>9}", "n0", "ratio");
                for a in &arms {
                    let _ = write!(out, " {:>16}", a.name());
                }
                out.push('\n');
                for &n0 in &n0s {
                    let ratio = self
                        .cells
                        .iter()
                        .find(|c| c.setting == setting && c.p == p && c.n0 == n0)
                        .map_or(f64::NAN, |c| c.imbalance_ratio);
                    let _ = write!(out, "{:>6} {:>8.1}%", n0, 100.0 * ratio);
                    for a in &arms {
                        let cell = self
                            .cells
                            .iter()
                            .find(|c| c.setting == setting && c.p == p && c.n0 == n0 && c.arm == *a);
                        let txt = match cell {
                            Some(c) => {
                                let s = if metric == "AUC" { c.auc() } else { c.auprc() };
                                let mut t = format!("{:.3} ({:.3})", s.mean, s.se);
                                if c.n_excluded() > 0 {
                                    t.push_str(&format!(" [{}x]", c.n_excluded()));
                                }
                                t
                            }
                            None => "-".to_string(),
                        };
                        let _ = write!(out, " {txt:>16}");
                    }
                    out.push('\n');
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Stream for one purpose within one repetition of one grid point.
pub fn rep_stream(spec: &SimSpec, rep: usize, purpose: u64) -> RngStream {
    RngStream::new(spec.seed, 0)
        .fork(u64::from(spec.setting))
        .fork(spec.p as u64)
        .fork(spec.n0 as u64)
        .fork(rep as u64)
        .fork(purpose)
}

/// Train and test partitions of one repetition, after contamination.
pub fn rep_data(spec: &SimSpec, rep: usize) -> Result<(Dataset, Dataset), SimError> {
    let full = gen_setting(spec, &mut rep_stream(spec, rep, TAG_GENERATE))?;
    let (train, test) = stratified_split(&full, spec.split, &mut rep_stream(spec, rep, TAG_SPLIT))?;
    let (train, _) = contaminate(&train, spec, &mut rep_stream(spec, rep, TAG_CONTAMINATE))?;
    Ok((train, test))
}

/// Fits the logistic model on `train` and scores `test`.
pub fn evaluate_split(train: &Dataset, test: &Dataset, logit: &LogitConfig) -> Result<Scores, RepFailure> {
    let model = fit_logit(train.x(), train.y(), logit).map_err(RepFailure::Classify)?;
    if model.separation {
        return Err(RepFailure::Separation);
    }
    let scores = predict_proba(&model, test.x()).map_err(RepFailure::Classify)?;
    let auc = roc_auc(&scores, test.y()).map_err(RepFailure::Metrics)?.area;
    let auprc = pr_auprc(&scores, test.y()).map_err(RepFailure::Metrics)?.area;
    Ok(Scores { auc, auprc })
}

fn run_arm(
    spec: &SimSpec,
    rep: usize,
    arm: Arm,
    train: &Dataset,
    test: &Dataset,
    cfg: &BenchConfig,
) -> Result<Result<Scores, RepFailure>, SimError> {
    let fitted = match arm {
        Arm::Imbalanced => train.clone(),
        Arm::Oversampled(method) => {
            let mut rng = rep_stream(spec, rep, TAG_OVERSAMPLE + arm.tag());
            match rebalance(train, method, &cfg.oversample, &mut rng) {
                Ok(d) => d,
                Err(e @ (ResampleError::InvalidConfig(_) | ResampleError::Data(_))) => {
                    return Err(SimError::InvalidSpec(e.to_string()))
                }
                Err(e) => return Ok(Err(RepFailure::Resample(e.to_string()))),
            }
        }
    };
    check_prefix(train, &fitted)?;
    Ok(evaluate_split(&fitted, test, &cfg.logit))
}

/// The rebalanced set starts with the original training rows and only adds
/// minority rows.
fn check_prefix(train: &Dataset, fitted: &Dataset) -> Result<(), SimError> {
    let n = train.n();
    let ok = fitted.n() >= n
        && fitted.x().as_slice()[..n * train.p()] == *train.x().as_slice()
        && fitted.y()[..n] == *train.y()
        && fitted.y()[n..].iter().all(|&v| v == 1);
    if ok {
        Ok(())
    } else {
        Err(SimError::TestPartitionChanged)
    }
}

fn fingerprint(d: &Dataset) -> u64 {
    // FNV-1a over the bit patterns
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in d.x().as_slice() {
        for b in v.to_bits().to_le_bytes() {
            h = (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3);
        }
    }
    for &b in d.y() {
        h = (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3);
    }
    h
}

fn run_rep(
    spec: &SimSpec,
    rep: usize,
    arms: &[Arm],
    cfg: &BenchConfig,
) -> Result<Vec<Result<Scores, RepFailure>>, SimError> {
    let (train, test) = rep_data(spec, rep)?;
    let before = fingerprint(&test);
    let mut out = Vec::with_capacity(arms.len());
    for &arm in arms {
        out.push(run_arm(spec, rep, arm, &train, &test, cfg)?);
    }
    if fingerprint(&test) != before {
        return Err(SimError::TestPartitionChanged);
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn run_reps(spec: &SimSpec, arms: &[Arm], cfg: &BenchConfig) -> Vec<Result<Vec<Result<Scores, RepFailure>>, SimError>> {
    use rayon::prelude::*;
    (0..spec.repetitions)
        .into_par_iter()
        .map(|r| run_rep(spec, r, arms, cfg))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_reps(spec: &SimSpec, arms: &[Arm], cfg: &BenchConfig) -> Vec<Result<Vec<Result<Scores, RepFailure>>, SimError>> {
    (0..spec.repetitions).map(|r| run_rep(spec, r, arms, cfg)).collect()
}

/// Runs every arm on every repetition of every grid point. Repetitions run
/// in parallel with the `parallel` feature; results are identical either way.
pub fn run_benchmark(grid: &[SimSpec], arms: &[Arm], cfg: &BenchConfig) -> Result<BenchReport, SimError> {
    if grid.is_empty() || arms.is_empty() {
        return Err(SimError::InvalidSpec("empty grid or arm list".into()));
    }
    cfg.oversample
        .validate()
        .map_err(|e| SimError::InvalidSpec(e.to_string()))?;
    let repetitions = grid[0].repetitions;
    let seed = grid[0].seed;
    let mut cells = Vec::new();
    for spec in grid {
        spec.validate()?;
        if spec.repetitions != repetitions || spec.seed != seed {
            return Err(SimError::InvalidSpec(
                "grid points must share repetitions and seed".into(),
            ));
        }
        let reps = run_reps(spec, arms, cfg);
        let mut spec_cells: Vec<Cell> = arms
            .iter()
            .map(|&arm| Cell {
                setting: spec.setting,
                n0: spec.n0,
                p: spec.p,
                imbalance_ratio: spec.imbalance_ratio(),
                arm,
                outcomes: Vec::with_capacity(spec.repetitions),
            })
            .collect();
        for rep in reps {
            for (cell, outcome) in spec_cells.iter_mut().zip(rep?) {
                cell.outcomes.push(outcome);
            }
        }
        for c in &spec_cells {
            let failed = c.n_excluded();
            if failed as f64 > cfg.max_failure_rate * spec.repetitions as f64 {
                return Err(SimError::TooManyFailures {
                    setting: c.setting,
                    n0: c.n0,
                    arm: c.arm,
                    failed,
                    total: spec.repetitions,
                });
            }
        }
        cells.extend(spec_cells);
    }
    Ok(BenchReport {
        seed,
        repetitions,
        cells,
    })
}
