//! Scoring: confusion matrix, accuracy, precision/recall/F1, ROC curves and
//! trapezoidal AUC.
//!
//! Positive sentiment is the positive class throughout. Because that is the
//! majority class in this domain, reports additionally carry the
//! negative-class (minority) view: minority recall is the metric that
//! actually separates models on imbalanced data.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentiment;
use crate::error::{Error, Result};

/// TP/FP/FN/TN counts with Positive as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `(TP + TN) / (TP + FP + FN + TN)`.
    pub fn accuracy(&self) -> Result<f64> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Data("accuracy of an empty confusion matrix".into()));
        }
        Ok((self.tp + self.tn) as f64 / total as f64)
    }

    /// `(precision, recall, f1)` with the zero conventions: precision is 0
    /// when TP+FP = 0, recall is 0 when TP+FN = 0, and F1 is 0 when both
    /// are 0.
    pub fn precision_recall_f1(&self) -> (f64, f64, f64) {
        let precision = if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        };
        let recall = if self.tp + self.fn_ == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        };
        (precision, recall, f1_from_precision_recall(precision, recall))
    }

    /// The same counts viewed with Negative as the positive class.
    pub fn negative_class_view(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

/// `2pr / (p + r)`, zero when both inputs are zero.
pub fn f1_from_precision_recall(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Count the four confusion cells from aligned prediction/truth sequences.
pub fn confusion(predictions: &[Sentiment], truths: &[Sentiment]) -> Result<ConfusionMatrix> {
    if predictions.len() != truths.len() {
        return Err(Error::Data(format!(
            "{} predictions but {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (&pred, &truth) in predictions.iter().zip(truths) {
        match (pred, truth) {
            (Sentiment::Positive, Sentiment::Positive) => cm.tp += 1,
            (Sentiment::Positive, Sentiment::Negative) => cm.fp += 1,
            (Sentiment::Negative, Sentiment::Positive) => cm.fn_ += 1,
            (Sentiment::Negative, Sentiment::Negative) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// ROC curve points `(fpr, tpr)` from a descending threshold sweep,
/// starting at (0,0) and ending at (1,1). Tied scores are processed as one
/// group, producing diagonal segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Two-column CSV (`fpr,tpr`) for external plotting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "fpr,tpr")?;
        for (fpr, tpr) in &self.points {
            writeln!(out, "{fpr},{tpr}")?;
        }
        Ok(())
    }
}

/// Sweep thresholds over distinct score values in descending order.
/// Higher scores mean more Positive. Errors when the truth labels contain a
/// single class (the curve, and AUC, would be undefined).
pub fn roc_curve(scores: &[f64], truths: &[Sentiment]) -> Result<RocCurve> {
    if scores.len() != truths.len() {
        return Err(Error::Data(format!(
            "{} scores but {} truths",
            scores.len(),
            truths.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Data("scores must be finite".into()));
    }
    let positives = truths.iter().filter(|&&t| t == Sentiment::Positive).count();
    let negatives = truths.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Data(
            "ROC needs at least one example of each class".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut idx = 0;
    while idx < order.len() {
        let threshold = scores[order[idx]];
        while idx < order.len() && scores[order[idx]] == threshold {
            match truths[order[idx]] {
                Sentiment::Positive => tp += 1,
                Sentiment::Negative => fp += 1,
            }
            idx += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the curve. With the tie-grouped sweep above this
/// equals the Mann-Whitney rank statistic on the same scores.
pub fn auc(curve: &RocCurve) -> f64 {
    let mut area = 0.0;
    for pair in curve.points.windows(2) {
        let (x1, y1) = pair[0];
        let (x2, y2) = pair[1];
        area += (x2 - x1) * (y1 + y2) / 2.0;
    }
    area
}

/// Per-class precision/recall/F1 triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let (precision, recall, f1) = cm.precision_recall_f1();
        ClassMetrics { precision, recall, f1 }
    }
}

/// Both class views of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerClassMetrics {
    pub positive: ClassMetrics,
    pub negative: ClassMetrics,
}

/// Full scoring report for one model on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub config_fingerprint: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    /// Recall of the Negative (minority) class; the headline number for
    /// imbalance handling.
    pub minority_recall: f64,
    pub confusion: ConfusionMatrix,
    pub per_class: PerClassMetrics,
}

/// Assemble a [`MetricsReport`] from decision values, hard predictions, and
/// ground truth.
pub fn report(
    model: impl Into<String>,
    config_fingerprint: impl Into<String>,
    scores: &[f64],
    predictions: &[Sentiment],
    truths: &[Sentiment],
) -> Result<(MetricsReport, RocCurve)> {
    let cm = confusion(predictions, truths)?;
    let curve = roc_curve(scores, truths)?;
    let area = auc(&curve);
    let positive = ClassMetrics::from_confusion(&cm);
    let negative = ClassMetrics::from_confusion(&cm.negative_class_view());
    let report = MetricsReport {
        model: model.into(),
        config_fingerprint: config_fingerprint.into(),
        accuracy: cm.accuracy()?,
        precision: positive.precision,
        recall: positive.recall,
        f1: positive.f1,
        auc: area,
        minority_recall: negative.recall,
        confusion: cm,
        per_class: PerClassMetrics { positive, negative },
    };
    Ok((report, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sentiment::{Negative as N, Positive as P};

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[P, P, N], &[P, P, N]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(2, 0, 0, 1));
        let cm = confusion(&[P], &[N]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(0, 1, 0, 0));
        assert!(confusion(&[P], &[P, N]).is_err());
    }

    #[test]
    fn all_positive_predictor_on_imbalanced_composition() {
        let cm = ConfusionMatrix::new(2714, 286, 0, 0);
        assert_eq!(cm.total(), 3000);
        let acc = cm.accuracy().unwrap();
        assert!((acc - 2714.0 / 3000.0).abs() < 1e-15);
        // Accuracy looks strong while minority recall is zero.
        assert!(acc > 0.9);
        let minority = cm.negative_class_view();
        let (_, recall, _) = minority.precision_recall_f1();
        assert_eq!(recall, 0.0);
    }

    #[test]
    fn accuracy_extremes() {
        assert_eq!(ConfusionMatrix::new(3, 0, 0, 2).accuracy().unwrap(), 1.0);
        assert_eq!(ConfusionMatrix::new(0, 2, 3, 0).accuracy().unwrap(), 0.0);
        assert!(ConfusionMatrix::new(0, 0, 0, 0).accuracy().is_err());
    }

    #[test]
    fn f1_against_published_rows() {
        // (precision, recall, printed f1) rows; forward-computed f1 agrees
        // within the printing precision.
        let rows = [
            (0.971, 0.997, 0.983),
            (0.946, 0.993, 0.968),
            (0.92, 0.994, 0.955),
            (0.901, 0.991, 0.942),
            (0.927, 0.992, 0.957),
        ];
        for (p, r, printed) in rows {
            let f1 = f1_from_precision_recall(p, r);
            assert!(
                (f1 - printed).abs() <= 0.002,
                "f1({p}, {r}) = {f1} vs printed {printed}"
            );
        }
        assert!((f1_from_precision_recall(0.971, 0.997) - 0.9838).abs() < 1e-4);
    }

    #[test]
    fn zero_conventions() {
        let (p, r, f1) = ConfusionMatrix::new(0, 0, 5, 5).precision_recall_f1();
        assert_eq!((p, r, f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn metrics_are_scale_free() {
        let cm = ConfusionMatrix::new(8, 2, 1, 9);
        let scaled = ConfusionMatrix::new(24, 6, 3, 27);
        assert_eq!(cm.accuracy().unwrap(), scaled.accuracy().unwrap());
        assert_eq!(cm.precision_recall_f1(), scaled.precision_recall_f1());
    }

    #[test]
    fn perfect_ranking_curve() {
        let curve = roc_curve(&[0.9, 0.1], &[P, N]).unwrap();
        assert_eq!(curve.points(), &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(auc(&curve), 1.0);
    }

    #[test]
    fn all_tied_scores_give_the_diagonal() {
        let curve = roc_curve(&[0.5, 0.5, 0.5], &[P, N, P]).unwrap();
        assert_eq!(curve.points(), &[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(auc(&curve), 0.5);
    }

    #[test]
    fn three_point_inversion_curve() {
        let curve = roc_curve(&[0.8, 0.6, 0.4], &[P, N, P]).unwrap();
        assert_eq!(
            curve.points(),
            &[(0.0, 0.0), (0.0, 0.5), (1.0, 0.5), (1.0, 1.0)]
        );
        assert!((auc(&curve) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_class_truth_is_an_error() {
        assert!(roc_curve(&[0.2, 0.4], &[P, P]).is_err());
    }

    #[test]
    fn roc_csv_format() {
        let curve = roc_curve(&[0.9, 0.1], &[P, N]).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "fpr,tpr\n0,0\n0,1\n1,1\n");
    }

    #[test]
    fn report_carries_both_class_views() {
        let scores = [1.0, 0.5, -0.5, -1.0];
        let preds = [P, P, N, N];
        let truths = [P, N, P, N];
        let (rep, _) = report("svm", "cfg", &scores, &preds, &truths).unwrap();
        assert_eq!(rep.confusion, ConfusionMatrix::new(1, 1, 1, 1));
        assert_eq!(rep.accuracy, 0.5);
        assert_eq!(rep.minority_recall, rep.per_class.negative.recall);
    }
}
