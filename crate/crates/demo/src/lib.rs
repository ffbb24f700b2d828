//! Browser demo: oversample a 2-D toy set, inspect the robust fit, and run one
//! benchmark repetition. Every export returns a JSON string.

use serde::{Deserialize, Serialize};
use skewguard::classify::{fit_logit, predict_proba, LogitConfig};
use skewguard::dataio::Dataset;
use skewguard::mcd::{fast_mcd, McdConfig};
use skewguard::metrics::{pr_auprc, roc_auc};
use skewguard::numkit::{chi2_quantile, Matrix, RngStream, SymMatrix};
use skewguard::resample::{oversample, Method, OversampleConfig};
use skewguard::simbench::{illustration_dataset, rep_data, rep_stream, SimSpec};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub label: u8,
}

/// Ellipse `{v : (v - center)' S^-1 (v - center) <= radius²}` traced as a polygon.
#[derive(Debug, Serialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub outline: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct OversampleView {
    pub method: String,
    pub synthetic: Vec<[f64; 2]>,
    pub excluded: Vec<usize>,
    pub fallback: bool,
    pub warnings: Vec<String>,
    /// Robust tolerance ellipse at the exclusion cutoff (robrose only).
    pub cutoff_ellipse: Option<Ellipse>,
    /// One-standard-deviation contour of the smoothing kernel.
    pub kernel_ellipse: Option<Ellipse>,
}

#[derive(Debug, Serialize)]
pub struct FitView {
    pub robust: Ellipse,
    pub classical: Ellipse,
    pub subset: Vec<usize>,
    pub outlying: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct ArmCurve {
    pub arm: String,
    pub auc: f64,
    pub auprc: f64,
    pub roc: Vec<[f64; 2]>,
    pub separation: bool,
}

#[derive(Debug, Serialize)]
struct Failure {
    error: String,
}

fn to_dataset(points: &[Point]) -> Result<Dataset, String> {
    let rows: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    let x = Matrix::from_rows(&rows).map_err(|e| e.to_string())?;
    let y = points.iter().map(|p| p.label).collect();
    Dataset::from_matrix(x, y).map_err(|e| e.to_string())
}

fn ellipse(center: &[f64], s: &SymMatrix, radius: f64) -> Ellipse {
    let m = s.matrix();
    let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    // 2x2 Cholesky
    let l11 = a.max(0.0).sqrt();
    let l21 = if l11 > 0.0 { b / l11 } else { 0.0 };
    let l22 = (c - l21 * l21).max(0.0).sqrt();
    let outline = (0..=72)
        .map(|k| {
            let t = k as f64 * std::f64::consts::TAU / 72.0;
            let (u, v) = (radius * t.cos(), radius * t.sin());
            [center[0] + l11 * u, center[1] + l21 * u + l22 * v]
        })
        .collect();
    Ellipse {
        center: [center[0], center[1]],
        outline,
    }
}

/// The two-cluster example with two distant minority points.
pub fn toy_points() -> Vec<Point> {
    let d = illustration_dataset().data;
    (0..d.n())
        .map(|i| Point {
            x: d.x().row(i)[0],
            y: d.x().row(i)[1],
            label: d.y()[i],
        })
        .collect()
}

pub fn oversample_points(
    points: &[Point],
    method: &str,
    seed: u64,
    target: f64,
    h: f64,
) -> Result<OversampleView, String> {
    let d = to_dataset(points)?;
    let method: Method = method.parse()?;
    let cfg = OversampleConfig {
        multiplier: target,
        h,
        seed,
        ..OversampleConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let r = oversample(&d, method, &cfg, &mut cfg.rng()).map_err(|e| e.to_string())?;
    let cutoff_ellipse = match &r.fit {
        Some(fit) => {
            let q = chi2_quantile(2, cfg.cutoff_prob).map_err(|e| e.to_string())?;
            Some(ellipse(&fit.center, &fit.scatter, q.sqrt()))
        }
        None => None,
    };
    let kernel_ellipse = r.kernel.as_ref().map(|k| {
        let at = r.fit.as_ref().map_or_else(|| vec![0.0, 0.0], |f| f.center.clone());
        ellipse(&at, k, 1.0)
    });
    Ok(OversampleView {
        method: method.name().to_string(),
        synthetic: r.z.iter_rows().map(|z| [z[0], z[1]]).collect(),
        excluded: r.excluded.clone(),
        fallback: r.fallback,
        warnings: r.warnings.clone(),
        cutoff_ellipse,
        kernel_ellipse,
    })
}

/// FastMCD and classical 97.5% tolerance ellipses of the minority points.
pub fn minority_fit(points: &[Point], seed: u64) -> Result<FitView, String> {
    let idx: Vec<usize> = (0..points.len()).filter(|&i| points[i].label == 1).collect();
    let rows: Vec<[f64; 2]> = idx.iter().map(|&i| [points[i].x, points[i].y]).collect();
    let x = Matrix::from_rows(&rows).map_err(|e| e.to_string())?;
    let fit = fast_mcd(&x, &McdConfig::default(), &RngStream::new(seed, 0)).map_err(|e| e.to_string())?;
    let (mean, cov) = skewguard::numkit::covariance(&x);
    let r = chi2_quantile(2, 0.975).map_err(|e| e.to_string())?.sqrt();
    let outlying = (0..x.rows())
        .filter(|&i| fit.mahalanobis_sq(x.row(i)).is_ok_and(|d| d > r * r))
        .map(|i| idx[i])
        .collect();
    Ok(FitView {
        robust: ellipse(&fit.center, &fit.scatter, r),
        classical: ellipse(&mean, &cov, r),
        subset: fit.subset.iter().map(|&i| idx[i]).collect(),
        outlying,
    })
}

/// One simulated train/test split, every arm, ROC curve per arm.
pub fn benchmark_rep(setting: u8, p: usize, n0: usize, seed: u64, rep: usize) -> Result<Vec<ArmCurve>, String> {
    let spec = SimSpec::for_setting(setting, p, n0)
        .map_err(|e| e.to_string())?
        .with_repetitions(rep + 1)
        .with_seed(seed);
    let (train, test) = rep_data(&spec, rep).map_err(|e| e.to_string())?;
    let cfg = OversampleConfig {
        seed,
        ..OversampleConfig::default()
    };
    let mut out = Vec::new();
    let arms = [None, Some(Method::Smote), Some(Method::Rose), Some(Method::RobRose)];
    for (tag, arm) in arms.into_iter().enumerate() {
        let fitted = match arm {
            None => train.clone(),
            Some(m) => {
                let mut rng = rep_stream(&spec, rep, 16 + tag as u64);
                let r = oversample(&train, m, &cfg, &mut rng).map_err(|e| e.to_string())?;
                train.append_synthetic(&r.z, None).map_err(|e| e.to_string())?
            }
        };
        let model = fit_logit(fitted.x(), fitted.y(), &LogitConfig::default()).map_err(|e| e.to_string())?;
        let scores = predict_proba(&model, test.x()).map_err(|e| e.to_string())?;
        let roc = roc_auc(&scores, test.y()).map_err(|e| e.to_string())?;
        let pr = pr_auprc(&scores, test.y()).map_err(|e| e.to_string())?;
        out.push(ArmCurve {
            arm: arm.map_or("imbalanced", Method::name).to_string(),
            auc: roc.area,
            auprc: pr.area,
            roc: roc.points.iter().map(|&(a, b)| [a, b]).collect(),
            separation: model.separation,
        });
    }
    Ok(out)
}

fn json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&Failure { error }),
    }
    .unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

fn parse_points(points_json: &str) -> Result<Vec<Point>, String> {
    serde_json::from_str(points_json).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn toy() -> String {
    json(Ok(toy_points()))
}

#[wasm_bindgen]
pub fn oversample_toy(points_json: &str, method: &str, seed: u32, target: f64, h: f64) -> String {
    json(parse_points(points_json).and_then(|p| oversample_points(&p, method, u64::from(seed), target, h)))
}

#[wasm_bindgen]
pub fn mcd_ellipse(points_json: &str, seed: u32) -> String {
    json(parse_points(points_json).and_then(|p| minority_fit(&p, u64::from(seed))))
}

#[wasm_bindgen]
pub fn benchmark_curves(setting: u8, p: usize, n0: usize, seed: u32, rep: usize) -> String {
    json(benchmark_rep(setting, p, n0, u64::from(seed), rep))
}
