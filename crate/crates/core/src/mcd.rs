//! Minimum covariance determinant via the FastMCD search.
//!
//! Elemental (p+1)-row starts are refined by C-steps: given a center and
//! scatter, keep the h rows with the smallest Mahalanobis distances and
//! recompute mean and covariance from them. A C-step never increases the
//! subset covariance determinant.

use thiserror::Error;

use crate::numkit::{
    self, chi2_cdf, chi2_quantile, cholesky, covariance_of_rows, LowerTriangular, Matrix, NumError, RngStream,
    SymMatrix,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McdError {
    #[error("too few rows for MCD: n = {n}, need at least {needed}")]
    TooFewRows { n: usize, needed: usize },
    #[error("singular data: at least {h} rows lie on a hyperplane")]
    SingularData { h: usize },
    #[error("subset covariance is singular")]
    DegenerateSubset,
    #[error("alpha must lie in [0.5, 1], got {0}")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartPlan {
    /// This many random elemental starts, each from its own forked stream.
    Random(usize),
    /// Every (p+1)-row subset, all refined to convergence. Only for tiny n.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McdConfig {
    /// Coverage fraction; 0.5 gives the maximal breakdown point.
    pub alpha: f64,
    pub starts: StartPlan,
    pub keep_best: usize,
    pub prelim_steps: usize,
    pub max_steps: usize,
    /// One-step reweighting at the χ²(p, 0.975) cutoff.
    pub reweight: bool,
}

impl Default for McdConfig {
    fn default() -> Self {
        McdConfig {
            alpha: 0.5,
            starts: StartPlan::Random(500),
            keep_best: 10,
            prelim_steps: 2,
            max_steps: 100,
            reweight: true,
        }
    }
}

/// Robust location and scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustFit {
    pub center: Vec<f64>,
    pub scatter: SymMatrix,
    /// Size of the retained subset.
    pub h: usize,
    /// Rows of the minimum-determinant h-subset, ascending.
    pub subset: Vec<usize>,
    /// det of the (uncorrected) covariance of the subset rows.
    pub raw_determinant: f64,
    pub raw_center: Vec<f64>,
    /// Consistency-corrected scatter of the h-subset.
    pub raw_scatter: SymMatrix,
    /// Rows kept by the reweighting step (all subset rows when not reweighted).
    pub reweighted_rows: Vec<usize>,
    chol: LowerTriangular,
}

impl RobustFit {
    /// Fit with a given center and scatter, e.g. a known model.
    pub fn from_parts(center: Vec<f64>, scatter: SymMatrix) -> Result<Self, McdError> {
        if center.len() != scatter.dim() {
            return Err(NumError::DimensionMismatch {
                expected: scatter.dim(),
                got: center.len(),
            }
            .into());
        }
        let chol = cholesky(&scatter)?;
        Ok(RobustFit {
            raw_center: center.clone(),
            raw_scatter: scatter.clone(),
            raw_determinant: chol.determinant_of_product(),
            center,
            scatter,
            h: 0,
            subset: Vec::new(),
            reweighted_rows: Vec::new(),
            chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn scatter_cholesky(&self) -> &LowerTriangular {
        &self.chol
    }

    /// Squared robust Mahalanobis distance of `x`.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> Result<f64, McdError> {
        Ok(numkit::mahalanobis_sq_chol(x, &self.center, &self.chol)?)
    }
}

/// Squared Mahalanobis distance of `x` with respect to `fit`.
pub fn mahalanobis_sq(x: &[f64], fit: &RobustFit) -> Result<f64, McdError> {
    fit.mahalanobis_sq(x)
}

/// Subset size for coverage `alpha`; ⌊(n+p+1)/2⌋ at alpha = 0.5.
pub fn subset_size(n: usize, p: usize, alpha: f64) -> usize {
    let half = (n + p).div_ceil(2);
    let h = (2.0 * half as f64 - n as f64 + 2.0 * (n - half) as f64 * alpha).floor() as usize;
    h.clamp(half, n)
}

/// Multiplier making a trimmed covariance consistent at the normal model
/// when a fraction `coverage` of the data is retained.
pub fn consistency_factor(p: usize, coverage: f64) -> Result<f64, McdError> {
    if coverage >= 1.0 {
        return Ok(1.0);
    }
    let q = chi2_quantile(p as u32, coverage)?;
    Ok(coverage / chi2_cdf(p as u32 + 2, q))
}

/// Result of one C-step.
#[derive(Debug, Clone, PartialEq)]
pub struct CStep {
    pub center: Vec<f64>,
    pub scatter: SymMatrix,
    pub subset: Vec<usize>,
    pub determinant: f64,
    /// The new subset covariance is singular.
    pub degenerate: bool,
}

/// One concentration step keeping `h` rows.
///
/// A singular `scatter` is ridged by 1e-8·trace/p for the distance ranking only.
pub fn c_step(x: &Matrix, h: usize, center: &[f64], scatter: &SymMatrix) -> Result<CStep, McdError> {
    let p = x.cols();
    if center.len() != p || scatter.dim() != p {
        return Err(NumError::DimensionMismatch {
            expected: p,
            got: center.len(),
        }
        .into());
    }
    if h > x.rows() || h < p + 1 {
        return Err(McdError::TooFewRows {
            n: x.rows(),
            needed: h.max(p + 1),
        });
    }
    let chol = ranking_factor(scatter)?;
    let subset = smallest_distances(x, h, center, &chol)?;
    let (c, s) = covariance_of_rows(x, &subset);
    let determinant = s.determinant();
    Ok(CStep {
        center: c,
        scatter: s,
        subset,
        determinant,
        degenerate: determinant == 0.0,
    })
}

fn ranking_factor(scatter: &SymMatrix) -> Result<LowerTriangular, McdError> {
    match cholesky(scatter) {
        Ok(l) => Ok(l),
        Err(_) => {
            let p = scatter.dim();
            let ridge = 1e-8 * scatter.trace() / p as f64;
            let mut m = scatter.matrix().clone();
            for i in 0..p {
                m[(i, i)] += ridge;
            }
            cholesky(&SymMatrix::new(m)?).map_err(|_| McdError::DegenerateSubset)
        }
    }
}

/// Indices of the `h` rows closest to `center`, ascending.
///
/// Distances within a relative 1e-9 of the h-th smallest count as tied and go
/// to the lower index. The rows of an elemental start are all equidistant from
/// its own fit, so rounding alone would otherwise pick among them.
fn smallest_distances(x: &Matrix, h: usize, center: &[f64], chol: &LowerTriangular) -> Result<Vec<usize>, McdError> {
    const TIE: f64 = 1e-9;
    let mut d: Vec<(f64, usize)> = Vec::with_capacity(x.rows());
    for (i, r) in x.iter_rows().enumerate() {
        d.push((numkit::mahalanobis_sq_chol(r, center, chol)?, i));
    }
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let cut = d[h - 1].0;
    let (lo, hi) = (cut - TIE * cut.abs(), cut + TIE * cut.abs());
    let mut subset: Vec<usize> = d.iter().take_while(|e| e.0 < lo).map(|&(_, i)| i).collect();
    let mut band: Vec<usize> = d.iter().filter(|e| e.0 >= lo && e.0 <= hi).map(|&(_, i)| i).collect();
    band.sort_unstable();
    subset.extend(band.into_iter().take(h - subset.len()));
    subset.sort_unstable();
    Ok(subset)
}

#[derive(Debug, Clone)]
struct Candidate {
    start: usize,
    state: CStep,
}

/// Iterates C-steps until the determinant stops decreasing (1e-12 relative),
/// the subset repeats, or `max_steps` is reached.
fn concentrate(x: &Matrix, h: usize, mut state: CStep, max_steps: usize) -> Result<CStep, McdError> {
    for _ in 0..max_steps {
        if state.degenerate {
            break;
        }
        let next = c_step(x, h, &state.center, &state.scatter)?;
        debug_assert!(
            next.determinant <= state.determinant * (1.0 + 1e-9),
            "C-step increased the determinant: {} -> {}",
            state.determinant,
            next.determinant
        );
        let converged = next.subset == state.subset
            || (state.determinant - next.determinant).abs() <= 1e-12 * state.determinant.abs();
        state = next;
        if converged {
            break;
        }
    }
    Ok(state)
}

/// Covariance of an elemental start, grown by random rows until nonsingular.
fn elemental_start(x: &Matrix, mut rows: Vec<usize>, rng: &mut RngStream) -> CStep {
    let n = x.rows();
    loop {
        let (c, s) = covariance_of_rows(x, &rows);
        let det = s.determinant();
        if det > 0.0 || rows.len() >= n {
            rows.sort_unstable();
            return CStep {
                center: c,
                scatter: s,
                subset: rows,
                determinant: det,
                degenerate: det == 0.0,
            };
        }
        let remaining: Vec<usize> = (0..n).filter(|i| !rows.contains(i)).collect();
        rows.push(remaining[rng.index(remaining.len())]);
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// FastMCD fit of location and scatter.
///
/// The raw scatter is multiplied by the consistency factor for coverage h/n.
/// With `reweight`, rows whose squared distance under the raw fit is within
/// χ²(p, 0.975) give the final mean and covariance, corrected again for 0.975
/// coverage.
pub fn fast_mcd(x: &Matrix, cfg: &McdConfig, rng: &RngStream) -> Result<RobustFit, McdError> {
    let (n, p) = (x.rows(), x.cols());
    if !(0.5..=1.0).contains(&cfg.alpha) {
        return Err(McdError::InvalidAlpha(cfg.alpha));
    }
    let needed = 2 * (p + 1);
    if n < needed || p == 0 {
        return Err(McdError::TooFewRows { n, needed });
    }
    let h = subset_size(n, p, cfg.alpha);

    let best = if h == n {
        let all: Vec<usize> = (0..n).collect();
        let (c, s) = covariance_of_rows(x, &all);
        let determinant = s.determinant();
        CStep {
            center: c,
            scatter: s,
            subset: all,
            determinant,
            degenerate: determinant == 0.0,
        }
    } else {
        let (starts, keep): (Vec<Vec<usize>>, usize) = match &cfg.starts {
            StartPlan::Exhaustive => {
                let c = combinations(n, p + 1);
                let len = c.len();
                (c, len)
            }
            StartPlan::Random(k) => {
                let starts = (0..*k).map(|s| rng.fork(s as u64).sample_distinct(n, p + 1)).collect();
                (starts, cfg.keep_best.max(1))
            }
        };
        let mut candidates = Vec::with_capacity(starts.len());
        for (s, rows) in starts.into_iter().enumerate() {
            let mut srng = rng.fork(s as u64).fork(u64::MAX);
            let mut state = elemental_start(x, rows, &mut srng);
            if state.degenerate {
                continue;
            }
            for _ in 0..cfg.prelim_steps {
                if state.degenerate {
                    break;
                }
                state = c_step(x, h, &state.center, &state.scatter)?;
            }
            candidates.push(Candidate { start: s, state });
        }
        if candidates.is_empty() {
            return Err(McdError::SingularData { h });
        }
        if candidates.iter().any(|c| c.state.degenerate) {
            return Err(McdError::SingularData { h });
        }
        candidates.sort_by(|a, b| {
            a.state
                .determinant
                .total_cmp(&b.state.determinant)
                .then(a.start.cmp(&b.start))
        });
        candidates.truncate(keep);
        let mut finals = Vec::with_capacity(candidates.len());
        for c in candidates {
            finals.push(Candidate {
                start: c.start,
                state: concentrate(x, h, c.state, cfg.max_steps)?,
            });
        }
        finals
            .into_iter()
            .min_by(|a, b| {
                a.state
                    .determinant
                    .total_cmp(&b.state.determinant)
                    .then(a.start.cmp(&b.start))
            })
            .map(|c| c.state)
            .expect("at least one candidate")
    };
    if best.degenerate {
        return Err(McdError::SingularData { h });
    }

    let raw_factor = consistency_factor(p, h as f64 / n as f64)?;
    let raw_scatter = best.scatter.scaled(raw_factor);
    let raw_chol = cholesky(&raw_scatter).map_err(|_| McdError::SingularData { h })?;

    let (center, scatter, chol, kept) = if cfg.reweight {
        let cutoff = chi2_quantile(p as u32, 0.975)?;
        let mut kept = Vec::new();
        for (i, r) in x.iter_rows().enumerate() {
            if numkit::mahalanobis_sq_chol(r, &best.center, &raw_chol)? <= cutoff {
                kept.push(i);
            }
        }
        let (c, s) = covariance_of_rows(x, &kept);
        let s = s.scaled(consistency_factor(p, 0.975)?);
        match cholesky(&s) {
            Ok(l) if kept.len() > p => (c, s, l, kept),
            _ => (
                best.center.clone(),
                raw_scatter.clone(),
                raw_chol.clone(),
                best.subset.clone(),
            ),
        }
    } else {
        (best.center.clone(), raw_scatter.clone(), raw_chol, best.subset.clone())
    };

    Ok(RobustFit {
        center,
        scatter,
        h,
        subset: best.subset,
        raw_determinant: best.determinant,
        raw_center: best.center,
        raw_scatter,
        reweighted_rows: kept,
        chol,
    })
}
