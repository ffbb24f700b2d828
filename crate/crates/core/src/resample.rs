//! Minority oversampling: SMOTE, ROSE and robROSE.
//!
//! robROSE fits FastMCD to the minority rows, drops rows whose squared robust
//! distance reaches the χ²(p, cutoff_prob) quantile, and draws synthetic rows
//! from N(x_j, H²·Σ̂₁) around uniformly chosen remaining rows x_j, where
//! H = h·(4/((p+2)·n))^(1/(p+4)). Synthetic rows inherit the categorical
//! values of their seed row.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dataio::{DataError, Dataset};
use crate::mcd::{fast_mcd, McdConfig, McdError, RobustFit};
use crate::numkit::{
    self, chi2_quantile, cholesky, mvn_sample, LowerTriangular, Matrix, NumError, RngStream, SymMatrix,
};

const MCD_STREAM_TAG: u64 = 0x4d43_4400;

#[derive(Debug, Error)]
pub enum ResampleError {
    #[error("invalid oversampling config: {0}")]
    InvalidConfig(String),
    #[error("no minority rows to oversample")]
    NoMinority,
    #[error("every minority row was flagged as an outlier")]
    EmptyInlierSet,
    #[error("minority class too small for MCD: {n1} rows, need {needed}")]
    DegenerateMinority { n1: usize, needed: usize },
    #[error("minority column '{0}' has zero variance")]
    ZeroVarianceColumn(String),
    #[error(transparent)]
    Mcd(#[from] McdError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Smote,
    Rose,
    RobRose,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Smote, Method::Rose, Method::RobRose];

    pub fn name(self) -> &'static str {
        match self {
            Method::Smote => "smote",
            Method::Rose => "rose",
            Method::RobRose => "robrose",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "smote" => Ok(Method::Smote),
            "rose" => Ok(Method::Rose),
            "robrose" | "rob_rose" | "rob-rose" => Ok(Method::RobRose),
            other => Err(format!("unknown method '{other}' (smote, rose, robrose)")),
        }
    }
}

/// Which count enters the smoothing constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingN {
    /// Minority rows of the training data.
    Minority,
    /// All training rows.
    Total,
}

impl FromStr for SmoothingN {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "minority" => Ok(SmoothingN::Minority),
            "total" => Ok(SmoothingN::Total),
            other => Err(format!("unknown smoothing count '{other}' (minority, total)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OversampleConfig {
    /// Final minority size as a multiple of the original minority count.
    pub multiplier: f64,
    /// Kernel shrink constant.
    pub h: f64,
    /// Probability of the χ² outlier cutoff.
    pub cutoff_prob: f64,
    /// SMOTE neighbour count.
    pub k: usize,
    pub smoothing_n: SmoothingN,
    pub mcd: McdConfig,
    pub seed: u64,
}

impl Default for OversampleConfig {
    fn default() -> Self {
        OversampleConfig {
            multiplier: 10.0,
            h: 0.5,
            cutoff_prob: 0.999,
            k: 5,
            smoothing_n: SmoothingN::Minority,
            mcd: McdConfig::default(),
            seed: 0,
        }
    }
}

impl OversampleConfig {
    pub fn validate(&self) -> Result<(), ResampleError> {
        if !(self.multiplier >= 1.0) || !self.multiplier.is_finite() {
            return Err(ResampleError::InvalidConfig(format!(
                "target multiplier {} < 1",
                self.multiplier
            )));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(ResampleError::InvalidConfig(format!("h = {} must be positive", self.h)));
        }
        if !(self.cutoff_prob > 0.5 && self.cutoff_prob < 1.0) {
            return Err(ResampleError::InvalidConfig(format!(
                "cutoff probability {} outside (0.5, 1)",
                self.cutoff_prob
            )));
        }
        if self.k == 0 {
            return Err(ResampleError::InvalidConfig("k must be at least 1".into()));
        }
        Ok(())
    }

    /// Fresh stream for a single oversampling call.
    pub fn rng(&self) -> RngStream {
        RngStream::new(self.seed, 0)
    }
}

#[derive(Debug, Clone)]
pub struct OversampleResult {
    pub method: Method,
    /// Synthetic rows, numeric features only.
    pub z: Matrix,
    /// Categorical codes of each synthetic row, copied from its seed row.
    pub z_categorical: Option<Vec<Vec<u32>>>,
    /// Dataset row index of the minority row each synthetic row came from.
    pub seeds: Vec<usize>,
    /// Dataset row indices of minority rows excluded as outliers, ascending.
    pub excluded: Vec<usize>,
    /// Kernel covariance, for ROSE and robROSE.
    pub kernel: Option<SymMatrix>,
    pub fit: Option<RobustFit>,
    /// robROSE fell back to ROSE.
    pub fallback: bool,
    pub warnings: Vec<String>,
}

impl OversampleResult {
    fn empty(method: Method, p: usize) -> Self {
        OversampleResult {
            method,
            z: Matrix::zeros(0, p),
            z_categorical: None,
            seeds: Vec::new(),
            excluded: Vec::new(),
            kernel: None,
            fit: None,
            fallback: false,
            warnings: Vec::new(),
        }
    }
}

/// round((m − 1)·n₁).
pub fn synthetic_count(n1: usize, multiplier: f64) -> usize {
    ((multiplier - 1.0) * n1 as f64).round() as usize
}

/// Gaussian-kernel smoothing constant (4/((p+2)·n))^(1/(p+4)).
pub fn smoothing_constant(p: usize, n: f64) -> f64 {
    let p = p as f64;
    (4.0 / ((p + 2.0) * n)).powf(1.0 / (p + 4.0))
}

/// H²·scatter with H = h·c.
pub fn robrose_kernel(scatter: &SymMatrix, n: f64, h: f64) -> SymMatrix {
    let bw = h * smoothing_constant(scatter.dim(), n);
    scatter.scaled(bw * bw)
}

/// diag((h·c·s_d)²) for per-column standard deviations `sd`.
pub fn rose_kernel(sd: &[f64], n: f64, h: f64) -> SymMatrix {
    let bw = h * smoothing_constant(sd.len(), n);
    SymMatrix::from_diagonal(&sd.iter().map(|s| (bw * s) * (bw * s)).collect::<Vec<_>>())
}

/// Inlier/outlier partition of minority rows.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierSplit {
    /// Row positions within the minority matrix with MD² below the cutoff.
    pub inliers: Vec<usize>,
    pub excluded: Vec<usize>,
    pub distances: Vec<f64>,
    pub cutoff: f64,
}

/// Keeps rows with squared robust distance strictly below χ²(p, cutoff_prob).
pub fn flag_outliers(x1: &Matrix, fit: &RobustFit, cutoff_prob: f64) -> Result<OutlierSplit, ResampleError> {
    let cutoff = chi2_quantile(x1.cols() as u32, cutoff_prob)?;
    let mut split = OutlierSplit {
        inliers: Vec::new(),
        excluded: Vec::new(),
        distances: Vec::with_capacity(x1.rows()),
        cutoff,
    };
    for (i, r) in x1.iter_rows().enumerate() {
        let d = fit.mahalanobis_sq(r)?;
        split.distances.push(d);
        if d < cutoff {
            split.inliers.push(i);
        } else {
            split.excluded.push(i);
        }
    }
    if split.inliers.is_empty() {
        return Err(ResampleError::EmptyInlierSet);
    }
    Ok(split)
}

/// Gaussian kernel around a pool of seed rows.
#[derive(Debug, Clone)]
pub struct KernelSampler {
    kernel: SymMatrix,
    chol: LowerTriangular,
    /// Eligible rows (positions in the minority matrix).
    pool: Vec<usize>,
}

impl KernelSampler {
    /// A zero kernel reproduces seed rows exactly.
    pub fn new(kernel: SymMatrix, pool: Vec<usize>) -> Result<Self, ResampleError> {
        let chol = if kernel.matrix().as_slice().iter().all(|&v| v == 0.0) {
            LowerTriangular::zeros(kernel.dim())
        } else {
            cholesky(&kernel)?
        };
        Ok(KernelSampler { kernel, chol, pool })
    }

    pub fn kernel(&self) -> &SymMatrix {
        &self.kernel
    }

    pub fn pool(&self) -> &[usize] {
        &self.pool
    }

    /// One draw around the given seed row.
    pub fn draw_from(&self, seed_row: &[f64], rng: &mut RngStream) -> Result<Vec<f64>, ResampleError> {
        Ok(mvn_sample(seed_row, &self.chol, rng)?)
    }

    /// Picks a seed uniformly from the pool and draws around it.
    pub fn draw(&self, x1: &Matrix, rng: &mut RngStream) -> Result<(usize, Vec<f64>), ResampleError> {
        let j = self.pool[rng.index(self.pool.len())];
        Ok((j, self.draw_from(x1.row(j), rng)?))
    }
}

fn smoothing_count(d: &Dataset, n1: usize, cfg: &OversampleConfig) -> f64 {
    match cfg.smoothing_n {
        SmoothingN::Minority => n1 as f64,
        SmoothingN::Total => d.n() as f64,
    }
}

fn run_sampler(
    d: &Dataset,
    minority: &[usize],
    sampler: &KernelSampler,
    count: usize,
    rng: &mut RngStream,
    out: &mut OversampleResult,
) -> Result<(), ResampleError> {
    let x1 = d.x().select_rows(minority);
    let mut z = Matrix::zeros(0, d.p());
    let mut seeds = Vec::with_capacity(count);
    for _ in 0..count {
        let (j, row) = sampler.draw(&x1, rng)?;
        z.push_row(&row)?;
        seeds.push(minority[j]);
    }
    out.z = z;
    out.z_categorical = d
        .categorical()
        .map(|c| seeds.iter().map(|&s| c.codes(s).to_vec()).collect());
    out.seeds = seeds;
    out.kernel = Some(sampler.kernel().clone());
    Ok(())
}

/// robROSE. Falls back to ROSE (with a warning) when the minority class has
/// fewer than 2(p+1) rows.
pub fn rob_rose(d: &Dataset, cfg: &OversampleConfig, rng: &mut RngStream) -> Result<OversampleResult, ResampleError> {
    cfg.validate()?;
    let minority = d.minority_indices();
    let (n1, p) = (minority.len(), d.p());
    if n1 == 0 {
        return Err(ResampleError::NoMinority);
    }
    let needed = 2 * (p + 1);
    if n1 < needed {
        let mut r = rose(d, cfg, rng)?;
        r.fallback = true;
        r.warnings.insert(
            0,
            format!("robROSE: minority class has {n1} rows, MCD needs {needed}; fell back to ROSE"),
        );
        return Ok(r);
    }
    let x1 = d.x().select_rows(&minority);
    let fit = fast_mcd(&x1, &cfg.mcd, &rng.fork(MCD_STREAM_TAG))?;
    let split = flag_outliers(&x1, &fit, cfg.cutoff_prob)?;
    let kernel = robrose_kernel(&fit.scatter, smoothing_count(d, n1, cfg), cfg.h);
    let sampler = KernelSampler::new(kernel, split.inliers.clone())?;

    let mut out = OversampleResult::empty(Method::RobRose, p);
    out.excluded = split.excluded.iter().map(|&i| minority[i]).collect();
    run_sampler(
        d,
        &minority,
        &sampler,
        synthetic_count(n1, cfg.multiplier),
        rng,
        &mut out,
    )?;
    out.fit = Some(fit);
    debug_assert!(out.seeds.iter().all(|s| out.excluded.binary_search(s).is_err()));
    Ok(out)
}

/// ROSE with a diagonal kernel built from classical minority standard deviations.
pub fn rose(d: &Dataset, cfg: &OversampleConfig, rng: &mut RngStream) -> Result<OversampleResult, ResampleError> {
    cfg.validate()?;
    let minority = d.minority_indices();
    let (n1, p) = (minority.len(), d.p());
    if n1 == 0 {
        return Err(ResampleError::NoMinority);
    }
    let mut out = OversampleResult::empty(Method::Rose, p);
    let sd: Vec<f64> = if n1 == 1 {
        out.warnings
            .push("ROSE: single minority row, synthetic rows duplicate it".to_string());
        vec![0.0; p]
    } else {
        let x1 = d.x().select_rows(&minority);
        let mut sd = Vec::with_capacity(p);
        for j in 0..p {
            let s = numkit::std_dev(&x1.column(j));
            if !(s > 0.0) {
                return Err(ResampleError::ZeroVarianceColumn(d.feature_names()[j].clone()));
            }
            sd.push(s);
        }
        sd
    };
    let kernel = rose_kernel(&sd, smoothing_count(d, n1, cfg), cfg.h);
    let sampler = KernelSampler::new(kernel, (0..n1).collect())?;
    run_sampler(
        d,
        &minority,
        &sampler,
        synthetic_count(n1, cfg.multiplier),
        rng,
        &mut out,
    )?;
    Ok(out)
}

/// The `k` nearest minority neighbours of each minority row (Euclidean,
/// ties to the lower row), as positions in the minority matrix.
pub fn nearest_neighbours(x1: &Matrix, k: usize) -> Vec<Vec<usize>> {
    let n = x1.rows();
    (0..n)
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let s: f64 = x1.row(i).iter().zip(x1.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    (s, j)
                })
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Point on the segment from `x` to `y` at fraction `alpha`.
pub fn interpolate(x: &[f64], y: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + alpha * (b - a)).collect()
}

/// SMOTE: interpolation between a minority row and one of its k nearest
/// minority neighbours. k is clamped to n₁ − 1.
pub fn smote(d: &Dataset, cfg: &OversampleConfig, rng: &mut RngStream) -> Result<OversampleResult, ResampleError> {
    cfg.validate()?;
    let minority = d.minority_indices();
    let (n1, p) = (minority.len(), d.p());
    if n1 == 0 {
        return Err(ResampleError::NoMinority);
    }
    let x1 = d.x().select_rows(&minority);
    let count = synthetic_count(n1, cfg.multiplier);
    let mut out = OversampleResult::empty(Method::Smote, p);
    let mut z = Matrix::zeros(0, p);
    let mut seeds = Vec::with_capacity(count);
    if n1 == 1 {
        out.warnings
            .push("SMOTE: single minority row, synthetic rows duplicate it".to_string());
        for _ in 0..count {
            z.push_row(x1.row(0))?;
            seeds.push(minority[0]);
        }
    } else {
        let k = cfg.k.min(n1 - 1);
        if k < cfg.k {
            out.warnings.push(format!("SMOTE: k clamped from {} to {k}", cfg.k));
        }
        let nn = nearest_neighbours(&x1, k);
        for _ in 0..count {
            let i = rng.index(n1);
            let j = nn[i][rng.index(k)];
            let alpha = rng.uniform();
            z.push_row(&interpolate(x1.row(i), x1.row(j), alpha))?;
            seeds.push(minority[i]);
        }
    }
    out.z_categorical = d
        .categorical()
        .map(|c| seeds.iter().map(|&s| c.codes(s).to_vec()).collect());
    out.z = z;
    out.seeds = seeds;
    Ok(out)
}

/// Runs the chosen oversampler on `d`.
pub fn oversample(
    d: &Dataset,
    method: Method,
    cfg: &OversampleConfig,
    rng: &mut RngStream,
) -> Result<OversampleResult, ResampleError> {
    match method {
        Method::Smote => smote(d, cfg, rng),
        Method::Rose => rose(d, cfg, rng),
        Method::RobRose => rob_rose(d, cfg, rng),
    }
}

/// `d` followed by the synthetic rows (label 1, marked synthetic).
pub fn append(d: &Dataset, r: &OversampleResult) -> Result<Dataset, ResampleError> {
    Ok(d.append_synthetic(&r.z, r.z_categorical.as_deref())?)
}

/// Oversamples the minority class of `d` to `multiplier · n₁` rows.
pub fn rebalance(
    d: &Dataset,
    method: Method,
    cfg: &OversampleConfig,
    rng: &mut RngStream,
) -> Result<Dataset, ResampleError> {
    d.check_training()?;
    let r = oversample(d, method, cfg, rng)?;
    append(d, &r)
}
