//! Confusion-matrix statistics, ROC/AUC and precision–recall/average precision.
//!
//! An observation is predicted positive when its score is at least the cutoff.
//! Tied scores always enter the counts together.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::dataio::{write_atomic, DataError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("both classes are required")]
    OneClassOnly,
    #[error("no positive labels")]
    NoPositives,
    #[error("label {0} is not binary")]
    NonBinaryLabel(u8),
    #[error("score at position {0} is not finite")]
    NonFiniteScore(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check(scores: &[f64], labels: &[u8]) -> Result<(), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if let Some(&l) = labels.iter().find(|&&l| l > 1) {
        return Err(MetricsError::NonBinaryLabel(l));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(i));
    }
    Ok(())
}

pub fn confusion(scores: &[f64], labels: &[u8], cutoff: f64) -> Result<ConfusionMatrix, MetricsError> {
    check(scores, labels)?;
    let mut cm = ConfusionMatrix::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= cutoff, l == 1) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Ratios with a zero denominator are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub accuracy: f64,
    pub error_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

pub fn summary_stats(cm: &ConfusionMatrix) -> SummaryStats {
    let accuracy = ratio(cm.tp + cm.tn, cm.total());
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        f64::NAN
    };
    SummaryStats {
        accuracy,
        error_rate: 1.0 - accuracy,
        precision,
        recall,
        f1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Roc,
    Pr,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Roc => "roc",
            CurveKind::Pr => "pr",
        })
    }
}

/// ROC points are (FPR, TPR); PR points are (recall, precision).
#[derive(Debug, Clone, PartialEq)]
pub struct CurveReport {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
    pub area: f64,
}

impl CurveReport {
    /// A `# kind=… area=…` line, an `x,y` header, then one point per line.
    pub fn to_csv_string(&self) -> String {
        let mut s = format!("# kind={} area={}\nx,y\n", self.kind, self.area);
        for (x, y) in &self.points {
            s.push_str(&format!("{x},{y}\n"));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        write_atomic(path.as_ref(), self.to_csv_string().as_bytes())
    }
}

/// Cumulative (tp, fp) after each group of tied scores, highest score first.
fn tie_groups(scores: &[f64], labels: &[u8]) -> Vec<(u64, u64)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push((tp, fp));
    }
    out
}

/// ROC curve over every distinct score, with trapezoidal area. The area equals
/// the Mann–Whitney probability that a positive outscores a negative, ties ½.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<CurveReport, MetricsError> {
    check(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l == 1).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::OneClassOnly);
    }
    let mut points = vec![(0.0, 0.0)];
    // twice the area in units of 1/(pos·neg), accumulated exactly
    let mut twice: u128 = 0;
    let (mut tp_prev, mut fp_prev) = (0u64, 0u64);
    for (tp, fp) in tie_groups(scores, labels) {
        twice += u128::from(fp - fp_prev) * u128::from(tp + tp_prev);
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        tp_prev = tp;
        fp_prev = fp;
    }
    let area = twice as f64 / (2.0 * pos as f64 * neg as f64);
    Ok(CurveReport {
        kind: CurveKind::Roc,
        points,
        area,
    })
}

/// Precision–recall curve over every distinct score, starting at (0, 1).
/// The area is average precision: Σ (recallₖ − recallₖ₋₁)·precisionₖ.
pub fn pr_auprc(scores: &[f64], labels: &[u8]) -> Result<CurveReport, MetricsError> {
    check(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l == 1).count() as u64;
    if pos == 0 {
        return Err(MetricsError::NoPositives);
    }
    let mut points = vec![(0.0, 1.0)];
    let mut area = 0.0;
    let mut tp_prev = 0u64;
    for (tp, fp) in tie_groups(scores, labels) {
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / pos as f64;
        area += (tp - tp_prev) as f64 / pos as f64 * precision;
        points.push((recall, precision));
        tp_prev = tp;
    }
    Ok(CurveReport {
        kind: CurveKind::Pr,
        points,
        area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[0.9, 0.1], &[1, 0], 0.5).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fp: 0,
                tn: 1,
                fn_: 0
            }
        );
        let cm = confusion(&[0.9, 0.8, 0.3], &[1, 0, 1], 0.5).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fp: 1,
                tn: 0,
                fn_: 1
            }
        );
        let cm = confusion(&[0.9, 0.8, 0.3], &[1, 0, 1], 0.95).unwrap();
        assert_eq!((cm.tp, cm.fp), (0, 0));
        // inclusive cutoff
        let cm = confusion(&[0.5], &[1], 0.5).unwrap();
        assert_eq!(cm.tp, 1);
        assert_eq!(
            confusion(&[0.1], &[1, 0], 0.5),
            Err(MetricsError::LengthMismatch { scores: 1, labels: 2 })
        );
    }

    #[test]
    fn summary_formulas() {
        let s = summary_stats(&ConfusionMatrix {
            tp: 1,
            fp: 0,
            tn: 1,
            fn_: 0,
        });
        assert_eq!((s.accuracy, s.f1, s.error_rate), (1.0, 1.0, 0.0));
        let s = summary_stats(&ConfusionMatrix {
            tp: 0,
            fp: 0,
            tn: 3,
            fn_: 1,
        });
        assert!(s.precision.is_nan());
        let s = summary_stats(&ConfusionMatrix {
            tp: 3,
            fp: 1,
            tn: 4,
            fn_: 2,
        });
        assert_eq!(s.precision, 0.75);
        assert_eq!(s.recall, 0.6);
        assert!((s.f1 - 2.0 * 0.75 * 0.6 / 1.35).abs() < 1e-15);
        assert!((s.f1 - 0.6667).abs() < 1e-4);
        assert_eq!(s.accuracy, 0.7);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[1.0, 0.0, 1.0, 0.0], &[1, 0, 1, 0]).unwrap().area, 1.0);
        assert_eq!(roc_auc(&[0.3; 6], &[1, 0, 1, 0, 0, 0]).unwrap().area, 0.5);
        assert_eq!(roc_auc(&[0.9, 0.8, 0.3, 0.2], &[1, 0, 1, 0]).unwrap().area, 0.75);
        assert_eq!(roc_auc(&[0.9, 0.8], &[1, 1]), Err(MetricsError::OneClassOnly));
    }

    #[test]
    fn roc_points_run_corner_to_corner() {
        let r = roc_auc(&[0.9, 0.8, 0.8, 0.3, 0.2], &[1, 0, 1, 1, 0]).unwrap();
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
        assert!(r.points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
        let trap: f64 = r
            .points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum();
        assert!((trap - r.area).abs() < 1e-12);
    }

    #[test]
    fn average_precision_examples() {
        let r = pr_auprc(&[0.9, 0.8, 0.3, 0.2], &[1, 0, 1, 0]).unwrap();
        assert!((r.area - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-15);
        assert!((r.area - 0.8333).abs() < 1e-4);
        assert_eq!(pr_auprc(&[0.1, 0.2, 0.9], &[0, 0, 1]).unwrap().area, 1.0);
        assert_eq!(pr_auprc(&[0.9, 0.1], &[0, 0]), Err(MetricsError::NoPositives));
        assert_eq!(r.points.first(), Some(&(0.0, 1.0)));
        assert_eq!(r.points.last().unwrap().0, 1.0);
        let step: f64 = r.points.windows(2).map(|w| (w[1].0 - w[0].0) * w[1].1).sum();
        assert!((step - r.area).abs() < 1e-12);
    }

    #[test]
    fn curve_csv_layout() {
        let r = roc_auc(&[0.9, 0.8, 0.3, 0.2], &[1, 0, 1, 0]).unwrap();
        let s = r.to_csv_string();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("# kind=roc area=0.75"));
        assert_eq!(lines.next(), Some("x,y"));
        assert_eq!(lines.next(), Some("0,0"));
        assert_eq!(s.lines().count(), 2 + r.points.len());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(roc_auc(&[0.1, f64::NAN], &[0, 1]), Err(MetricsError::NonFiniteScore(1)));
        assert_eq!(pr_auprc(&[0.1, 0.2], &[0, 2]), Err(MetricsError::NonBinaryLabel(2)));
    }
}
