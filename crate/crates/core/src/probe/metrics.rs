//! Regression, single-label and multi-label metric suites.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub mse: f64,
    pub r2: f64,
}

/// Support-weighted precision / recall / F1, plus plain accuracy (which equals
/// support-weighted recall) and macro F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub f1_macro: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelMetrics {
    pub f1_micro: f64,
    pub f1_macro: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricReport {
    Regression(RegressionMetrics),
    Classification(ClassificationMetrics),
    MultiLabel(MultiLabelMetrics),
}

impl MetricReport {
    /// Named values in a fixed order, for tables.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        match self {
            MetricReport::Regression(m) => vec![("mae", m.mae), ("mse", m.mse), ("r2", m.r2)],
            MetricReport::Classification(m) => vec![
                ("accuracy", m.accuracy),
                ("precision", m.precision),
                ("recall", m.recall),
                ("f1", m.f1),
                ("f1_macro", m.f1_macro),
            ],
            MetricReport::MultiLabel(m) => {
                vec![("f1_micro", m.f1_micro), ("f1_macro", m.f1_macro)]
            }
        }
    }
}

pub fn regression_metrics(truth: &[f64], pred: &[f64]) -> RegressionMetrics {
    let n = truth.len() as f64;
    let mae = truth.iter().zip(pred).map(|(y, p)| (y - p).abs()).sum::<f64>() / n;
    let ss_res: f64 = truth.iter().zip(pred).map(|(y, p)| (y - p).powi(2)).sum();
    let mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|y| (y - mean).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 0.0 } else { 1.0 - ss_res / ss_tot };
    RegressionMetrics {
        mae,
        mse: ss_res / n,
        r2,
    }
}

fn f1(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    let f = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f)
}

/// Per-class scores over the union of true and predicted labels; a class
/// with no predictions has precision 0.
pub fn classification_metrics<L: Ord + Clone>(truth: &[L], pred: &[L]) -> ClassificationMetrics {
    let n = truth.len();
    let labels: BTreeSet<&L> = truth.iter().chain(pred).collect();
    let mut weighted = (0.0, 0.0, 0.0);
    let mut macro_f1 = 0.0;
    for &label in &labels {
        let mut tp = 0;
        let mut fp = 0;
        let mut fn_ = 0;
        for (t, p) in truth.iter().zip(pred) {
            match (t == label, p == label) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                _ => {}
            }
        }
        let (p, r, f) = f1(tp, fp, fn_);
        let w = (tp + fn_) as f64 / n as f64;
        weighted.0 += w * p;
        weighted.1 += w * r;
        weighted.2 += w * f;
        macro_f1 += f;
    }
    let correct = truth.iter().zip(pred).filter(|(t, p)| t == p).count();
    ClassificationMetrics {
        accuracy: correct as f64 / n as f64,
        precision: weighted.0,
        recall: weighted.1,
        f1: weighted.2,
        f1_macro: macro_f1 / labels.len() as f64,
    }
}

/// Rows are samples, columns labels.
pub fn multilabel_metrics(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> MultiLabelMetrics {
    let n_labels = truth.first().map_or(0, Vec::len);
    let mut totals = (0, 0, 0);
    let mut macro_f1 = 0.0;
    for j in 0..n_labels {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for (t, p) in truth.iter().zip(pred) {
            match (t[j], p[j]) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                _ => {}
            }
        }
        macro_f1 += f1(tp, fp, fn_).2;
        totals.0 += tp;
        totals.1 += fp;
        totals.2 += fn_;
    }
    MultiLabelMetrics {
        f1_micro: f1(totals.0, totals.1, totals.2).2,
        f1_macro: if n_labels == 0 { 0.0 } else { macro_f1 / n_labels as f64 },
    }
}
