//! Binary logistic regression fitted by iteratively reweighted least squares.

use thiserror::Error;

use crate::numkit::{cholesky, solve_cholesky, Matrix, SymMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("too few rows: n = {n} must exceed p + 1 = {needed}")]
    TooFewRows { n: usize, needed: usize },
    #[error("Fisher information is singular")]
    SingularInformation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogitConfig {
    pub max_iter: usize,
    /// Convergence threshold on the largest parameter change.
    pub tol: f64,
    /// Ridge penalty ε‖β‖² on the slopes; 0 disables it.
    pub ridge: f64,
    pub max_halvings: usize,
}

impl Default for LogitConfig {
    fn default() -> Self {
        LogitConfig {
            max_iter: 100,
            tol: 1e-8,
            ridge: 0.0,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogitModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Fitted probabilities collapsed onto the labels; estimates are the last iterate.
    pub separation: bool,
    pub log_likelihood: f64,
    /// Some feature spans more than 10³; IRLS expects scaled columns.
    pub scale_warning: bool,
}

impl LogitModel {
    pub fn zero(p: usize) -> Self {
        LogitModel {
            intercept: 0.0,
            coefficients: vec![0.0; p],
            converged: true,
            iterations: 0,
            separation: false,
            log_likelihood: f64::NAN,
            scale_warning: false,
        }
    }

    pub fn linear_predictor(&self, x: &Matrix) -> Result<Vec<f64>, ClassifyError> {
        if x.cols() != self.coefficients.len() && x.rows() > 0 {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.coefficients.len(),
                got: x.cols(),
            });
        }
        Ok((0..x.rows())
            .map(|i| eta(self.intercept, &self.coefficients, x.row(i)))
            .collect())
    }
}

fn eta(b0: f64, b: &[f64], row: &[f64]) -> f64 {
    b0 + b.iter().zip(row).map(|(c, v)| c * v).sum::<f64>()
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^t) without overflow.
fn log1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Binomial log-likelihood at (intercept, coefficients).
pub fn log_likelihood(beta: &[f64], x: &Matrix, y: &[u8]) -> f64 {
    x.iter_rows()
        .zip(y)
        .map(|(r, &yi)| {
            let t = eta(beta[0], &beta[1..], r);
            f64::from(yi) * t - log1p_exp(t)
        })
        .sum()
}

/// Gradient of [`log_likelihood`] with respect to (intercept, coefficients).
pub fn gradient(beta: &[f64], x: &Matrix, y: &[u8]) -> Vec<f64> {
    let mut g = vec![0.0; beta.len()];
    for (r, &yi) in x.iter_rows().zip(y) {
        let resid = f64::from(yi) - sigmoid(eta(beta[0], &beta[1..], r));
        g[0] += resid;
        for (gj, v) in g[1..].iter_mut().zip(r) {
            *gj += resid * v;
        }
    }
    g
}

fn penalized(beta: &[f64], x: &Matrix, y: &[u8], ridge: f64) -> f64 {
    log_likelihood(beta, x, y) - ridge * beta[1..].iter().map(|b| b * b).sum::<f64>()
}

/// Maximum-likelihood logistic regression by IRLS with step halving.
///
/// Perfect separation is reported through `separation` and `converged =
/// false` rather than as an error.
pub fn fit_logit(x: &Matrix, y: &[u8], cfg: &LogitConfig) -> Result<LogitModel, ClassifyError> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(ClassifyError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if n <= p + 1 {
        return Err(ClassifyError::TooFewRows { n, needed: p + 1 });
    }
    let scale_warning = (0..p).any(|j| {
        let col = x.column(j);
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        hi - lo > 1e3
    });

    let k = p + 1;
    let mut beta = vec![0.0; k];
    let mut ll = penalized(&beta, x, y, cfg.ridge);
    let mut converged = false;
    let mut separation = false;
    let mut iterations = 0;
    let mut info = Matrix::zeros(k, k);
    let mut score = vec![0.0; k];
    let mut xi = vec![0.0; k];

    while iterations < cfg.max_iter {
        iterations += 1;
        for v in score.iter_mut() {
            *v = 0.0;
        }
        let mut acc = vec![0.0; k * k];
        let mut max_resid: f64 = 0.0;
        for (r, &yi) in x.iter_rows().zip(y) {
            let mu = sigmoid(eta(beta[0], &beta[1..], r));
            let w = mu * (1.0 - mu);
            let resid = f64::from(yi) - mu;
            max_resid = max_resid.max(resid.abs());
            xi[0] = 1.0;
            xi[1..].copy_from_slice(r);
            for a in 0..k {
                score[a] += resid * xi[a];
                let wa = w * xi[a];
                for b in 0..=a {
                    acc[a * k + b] += wa * xi[b];
                }
            }
        }
        if max_resid < 1e-8 {
            separation = true;
            break;
        }
        for a in 0..k {
            for b in 0..=a {
                info[(a, b)] = acc[a * k + b];
                info[(b, a)] = acc[a * k + b];
            }
        }
        for a in 1..k {
            info[(a, a)] += 2.0 * cfg.ridge;
            score[a] -= 2.0 * cfg.ridge * beta[a];
        }
        let info_sym = SymMatrix::new(info.clone()).map_err(|_| ClassifyError::SingularInformation)?;
        let step = match cholesky(&info_sym) {
            Ok(l) => solve_cholesky(&l, &score).map_err(|_| ClassifyError::SingularInformation)?,
            Err(_) => {
                if max_resid < 1e-4 {
                    separation = true;
                    break;
                }
                return Err(ClassifyError::SingularInformation);
            }
        };

        let mut t = 1.0;
        let mut candidate: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + s).collect();
        let mut ll_new = penalized(&candidate, x, y, cfg.ridge);
        let mut halvings = 0;
        while !(ll_new >= ll - 1e-12 * ll.abs()) && halvings < cfg.max_halvings {
            t *= 0.5;
            halvings += 1;
            candidate = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            ll_new = penalized(&candidate, x, y, cfg.ridge);
        }
        if !(ll_new >= ll - 1e-12 * ll.abs()) {
            // no ascent along the Newton direction; keep the current iterate
            break;
        }
        let change = beta
            .iter()
            .zip(&candidate)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        beta = candidate;
        ll = ll_new;
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(ClassifyError::SingularInformation);
    }
    Ok(LogitModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        converged: converged && !separation,
        iterations,
        separation,
        log_likelihood: log_likelihood(&beta, x, y),
        scale_warning,
    })
}

/// σ(intercept + x·coefficients) for every row.
pub fn predict_proba(model: &LogitModel, x: &Matrix) -> Result<Vec<f64>, ClassifyError> {
    Ok(model.linear_predictor(x)?.into_iter().map(sigmoid).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::RngStream;

    #[test]
    fn zero_model_predicts_half() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [-3.0, 0.5]]).unwrap();
        assert_eq!(predict_proba(&LogitModel::zero(2), &x).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn intercept_log_three() {
        let m = LogitModel {
            intercept: 3f64.ln(),
            ..LogitModel::zero(0)
        };
        let p = predict_proba(&m, &Matrix::zeros(2, 0)).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn prediction_dimension_mismatch() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(
            predict_proba(&LogitModel::zero(2), &x),
            Err(ClassifyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sigmoid_is_monotone_and_bounded() {
        let mut prev = 0.0;
        for i in -300..=300 {
            let s = sigmoid(i as f64 * 0.1);
            assert!(s >= prev && s > 0.0 && s < 1.0);
            prev = s;
        }
    }

    #[test]
    fn separable_data_flags_separation() {
        let x = Matrix::from_rows(&[[-1.0], [-1.0], [1.0], [1.0], [-1.0], [1.0]]).unwrap();
        let y = [0, 0, 1, 1, 0, 1];
        let m = fit_logit(&x, &y, &LogitConfig::default()).unwrap();
        assert!(m.separation);
        assert!(!m.converged);
        assert!(m.coefficients[0] > 5.0);
    }

    #[test]
    fn mirrored_classes_have_zero_intercept() {
        let mut rng = RngStream::new(8, 0);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..200 {
            let r = [rng.standard_normal() + 0.5, rng.standard_normal()];
            rows.push(r);
            y.push(1);
            rows.push([-r[0], -r[1]]);
            y.push(0);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit_logit(&x, &y, &LogitConfig::default()).unwrap();
        assert!(m.converged);
        assert!(m.intercept.abs() < 1e-6, "{}", m.intercept);
    }

    #[test]
    fn null_model_intercept() {
        let mut rng = RngStream::new(9, 0);
        let n = 20_000;
        let rows: Vec<[f64; 2]> = (0..n).map(|_| [rng.standard_normal(), rng.standard_normal()]).collect();
        let y: Vec<u8> = (0..n).map(|i| u8::from(i % 5 == 0)).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit_logit(&x, &y, &LogitConfig::default()).unwrap();
        let target = (4000.0f64 / 16000.0).ln();
        assert!((m.intercept - target).abs() < 0.05);
        assert!(m.coefficients.iter().all(|c| c.abs() < 0.05));
    }

    #[test]
    fn too_few_rows() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert_eq!(
            fit_logit(&x, &[0, 1], &LogitConfig::default()),
            Err(ClassifyError::TooFewRows { n: 2, needed: 3 })
        );
    }

    #[test]
    fn ridge_shrinks_slopes() {
        let mut rng = RngStream::new(10, 0);
        let rows: Vec<[f64; 1]> = (0..300).map(|_| [rng.standard_normal()]).collect();
        let y: Vec<u8> = rows
            .iter()
            .map(|r| u8::from(r[0] + rng.standard_normal() > 0.0))
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let plain = fit_logit(&x, &y, &LogitConfig::default()).unwrap();
        let ridged = fit_logit(
            &x,
            &y,
            &LogitConfig {
                ridge: 10.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(ridged.coefficients[0].abs() < plain.coefficients[0].abs());
    }
}
